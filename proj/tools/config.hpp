#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fadrc/adrc.hpp"
#include "fadrc/plants.hpp"
#include "fadrc/simkit.hpp"

namespace fadrc::cli {

// Flat key=value file with [section] headers; '#' and ';' start comments.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text, const std::string& origin = "<config>");
    static ConfigFile load(const std::filesystem::path& path);

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;
    const std::string& raw(const std::string& section, const std::string& key) const;
    double number(const std::string& section, const std::string& key) const;
    double number_or(const std::string& section, const std::string& key, double fallback) const;
    int integer_or(const std::string& section, const std::string& key, int fallback) const;
    std::string text_or(const std::string& section, const std::string& key, const std::string& fallback) const;
    std::vector<double> list_or(const std::string& section, const std::string& key,
                                const std::vector<double>& fallback) const;

private:
    std::string origin_;
    std::map<std::string, std::map<std::string, std::string>> values_;
};

// Everything the commands need, resolved from a ConfigFile with defaults filled in.
struct RunConfig {
    PlantModel plant;
    std::optional<PmsmParams> pmsm;
    ObserverKind observer_kind = ObserverKind::IFO;
    int n = 2;
    double gamma = 0.75;
    double omega_o = 700.0;
    double b0 = 0.0;
    double sample_rate = 8000.0;
    int approx_order = 7;
    ChannelScheme scheme = ChannelScheme::gl;

    double k_fp = 356.0;
    std::optional<double> k_ip, k_id; // design runs when absent
    std::optional<double> target_wc, target_pm;

    SimConfig sim;
    double reference = 1.0;
    std::vector<double> gains{0.8, 1.0, 1.2};
    double settle_band_pct = 2.0;
    double bode_lo = 1.0, bode_hi = 1e4;
    int bode_points = 400;
    double mse_lo = 10.0, mse_hi = 1e4;
    int mse_points = 400;
    std::vector<double> sweep_a_o, sweep_omega_o, sweep_gamma;

    std::filesystem::path out_dir;
    bool emit_plots = false;

    ObserverConfig observer(ObserverKind kind) const;
};

RunConfig resolve(const ConfigFile& file);

} // namespace fadrc::cli
