#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "fadrc/numeric.hpp"

namespace fadrc {

// Strictly positive, finite derivative order. Integrators are negative
// exponents in FoTransferFunction, never a FractionalOrder.
class FractionalOrder {
public:
    explicit FractionalOrder(double v);
    double value() const { return v_; }

private:
    double v_;
};

// (j*omega)^order on the principal branch.
cplx s_power_response(double order, double omega);

// Grünwald-Letnikov weights of (1 - z^-1)^alpha; alpha < 0 gives an integrator.
std::vector<double> gl_weights(double alpha, std::size_t count);

// Order-gamma derivative of an at-rest sampled signal by the GL finite sum.
// First-order accurate in step.
std::vector<double> caputo_gl_oracle(std::span<const double> samples, FractionalOrder order, double step);

// IIR filter, ascending powers of z^-1, monic denominator. Internally a cascade
// of transposed direct form II sections: expanding products of factors with
// poles near z = 1 into one polynomial loses most of the low-frequency accuracy.
class DiscreteFilter {
public:
    DiscreteFilter(std::vector<double> num, std::vector<double> den, double sample_rate,
                   double approximated_order = 0.0);
    // Series connection; all parts must share the sample rate.
    static DiscreteFilter cascade(const std::vector<DiscreteFilter>& parts, double approximated_order);

    double step(double x);
    // Output the next step() would produce for a zero input.
    double free_response() const;
    double feedthrough() const;
    void reset();

    cplx response(double omega) const;
    std::vector<cplx> poles() const;
    bool stable(double margin = 1e-9) const;
    DiscreteFilter inverse() const;

    // Expanded coefficients of the whole cascade.
    std::vector<double> numerator() const;
    std::vector<double> denominator() const;
    std::size_t section_count() const { return sec_.size(); }
    double sample_rate() const { return fs_; }
    double approximated_order() const { return order_; }

    // Worst in-band deviation from the continuous target, filled by synthesis.
    double band_error_db = 0.0;
    double band_error_deg = 0.0;

    std::string serialize() const;
    static DiscreteFilter parse(const std::string& text);

private:
    struct Section {
        std::vector<double> b, a, state;
        double step(double x);
    };
    DiscreteFilter() = default;
    std::vector<Section> sec_;
    double fs_ = 1.0;
    double order_ = 0.0;
};

double filter_step(DiscreteFilter& filter, double input);

struct IriOptions {
    double band_lo_hz = 0.0;  // 0: sample_rate / 8000
    double band_hi_hz = 0.0;  // 0: sample_rate / 20
    double impulse_seconds = 0.0; // 0: half a period of band_lo
    double max_mag_err_db = 1.0;
    double max_phase_err_deg = 5.0;
};

// Impulse-response-invariant fit of s^-r, 0 < r < 1.
DiscreteFilter iri_integrator(double r, double sample_rate, int approx_order, const IriOptions& opt = {});

// Impulse-response-invariant realization of s^order.
DiscreteFilter iri_discretize(FractionalOrder order, double sample_rate, int approx_order,
                              const IriOptions& opt = {});

// Worst magnitude (dB) and phase (deg) deviation of filter from (j omega)^order
// on a log grid over [lo_hz, hi_hz].
std::pair<double, double> band_error(const DiscreteFilter& f, double order, double lo_hz, double hi_hz,
                                     int points = 400);

// Full-memory GL operator (1 - z^-1)^alpha / T^alpha; alpha < 0 integrates.
// Cost grows linearly with the number of samples processed.
class GlOperator {
public:
    GlOperator(double alpha, double step);
    double step(double x);
    double feedthrough() const { return scale_; }
    double free_response() const;
    void reset();
    std::size_t samples() const { return hist_.size(); }
    double alpha() const { return alpha_; }

private:
    void grow(std::size_t need);
    double alpha_, scale_;
    std::vector<double> hist_;
    std::vector<double> wrev_; // weights 1..cap stored reversed for a forward dot product
    std::size_t cap_ = 0;
};

} // namespace fadrc
