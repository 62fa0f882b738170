#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "fadrc/errors.hpp"

namespace fadrc::cli {

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"plant", {"denom", "b"}},
        {"pmsm", {"Cm", "GD2", "B", "Kv", "K1", "Ti", "Rs", "Lq", "Ce"}},
        {"observer", {"kind", "n", "gamma", "omega_o", "b0", "sample_rate", "approx_order", "scheme"}},
        {"controller", {"k_fp", "k_ip", "k_id", "target_wc", "target_pm"}},
        {"sim",
         {"horizon", "plant_substeps", "reference", "gains", "settle_band_pct", "bode_lo", "bode_hi", "bode_points",
          "mse_lo", "mse_hi", "mse_points", "sweep_a_o", "sweep_omega_o", "sweep_gamma"}},
    };
    return keys;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_number(const std::string& text, const std::string& where) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || p != end)
        throw ConfigError(fmt::format("{}: '{}' is not a number", where, text));
    return v;
}

} // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
    ConfigFile cf;
    cf.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto cut = line.find_first_of("#;");
        const std::string s = trim(cut == std::string::npos ? line : line.substr(0, cut));
        if (s.empty())
            continue;
        const std::string where = fmt::format("{}:{}", origin, lineno);
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError(fmt::format("{}: malformed section header", where));
            section = trim(std::string_view(s).substr(1, s.size() - 2));
            if (!allowed_keys().contains(section))
                throw ConfigError(fmt::format("{}: unknown section [{}]", where, section));
            cf.values_[section];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(fmt::format("{}: expected key = value", where));
        if (section.empty())
            throw ConfigError(fmt::format("{}: key outside of any section", where));
        const std::string key = trim(std::string_view(s).substr(0, eq));
        const std::string val = trim(std::string_view(s).substr(eq + 1));
        if (!allowed_keys().at(section).contains(key))
            throw ConfigError(fmt::format("{}: unknown key '{}' in [{}]", where, key, section));
        if (!cf.values_[section].emplace(key, val).second)
            throw ConfigError(fmt::format("{}: duplicate key '{}' in [{}]", where, key, section));
    }
    return cf;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path.string());
}

bool ConfigFile::has_section(const std::string& section) const { return values_.contains(section); }

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto it = values_.find(section);
    return it != values_.end() && it->second.contains(key);
}

const std::string& ConfigFile::raw(const std::string& section, const std::string& key) const {
    if (!has(section, key))
        throw ConfigError(fmt::format("{}: missing required key '{}' in [{}]", origin_, key, section));
    return values_.at(section).at(key);
}

double ConfigFile::number(const std::string& section, const std::string& key) const {
    return to_number(raw(section, key), fmt::format("{}: [{}] {}", origin_, section, key));
}

double ConfigFile::number_or(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
}

int ConfigFile::integer_or(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key))
        return fallback;
    const double v = number(section, key);
    if (v != static_cast<int>(v))
        throw ConfigError(fmt::format("{}: [{}] {} must be an integer", origin_, section, key));
    return static_cast<int>(v);
}

std::string ConfigFile::text_or(const std::string& section, const std::string& key,
                                const std::string& fallback) const {
    return has(section, key) ? raw(section, key) : fallback;
}

std::vector<double> ConfigFile::list_or(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
    if (!has(section, key))
        return fallback;
    std::vector<double> out;
    std::istringstream in(raw(section, key));
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(to_number(item, fmt::format("{}: [{}] {}", origin_, section, key)));
    }
    return out;
}

ObserverConfig RunConfig::observer(ObserverKind kind) const {
    ObserverConfig c;
    c.kind = kind;
    c.m = plant.order_m();
    c.n = kind == ObserverKind::IO ? c.m : n;
    c.gamma = gamma;
    c.b0 = b0;
    c.gains_L = bandwidth_gains(omega_o, c.n);
    c.sample_rate = sample_rate;
    c.approx_order = approx_order;
    c.scheme = scheme;
    return c;
}

RunConfig resolve(const ConfigFile& f) {
    RunConfig rc;
    if (f.has_section("pmsm")) {
        PmsmParams p;
        p.torque_coeff_Cm = f.number("pmsm", "Cm");
        p.flywheel_inertia_GD2 = f.number("pmsm", "GD2");
        p.viscous_B = f.number("pmsm", "B");
        p.speed_factor_Kv = f.number("pmsm", "Kv");
        p.speed_conv_K1 = f.number("pmsm", "K1");
        p.filter_Ti = f.number("pmsm", "Ti");
        p.phase_resistance_Rs = f.number("pmsm", "Rs");
        p.q_inductance_Lq = f.number("pmsm", "Lq");
        p.emf_coeff_Ce = f.number("pmsm", "Ce");
        rc.pmsm = p;
    }
    if (f.has_section("plant") || !rc.pmsm) {
        rc.plant.denom_coeffs = f.list_or("plant", "denom", {});
        if (rc.plant.denom_coeffs.empty())
            f.raw("plant", "denom");
        rc.plant.gain_b = f.number("plant", "b");
    } else {
        rc.plant = pmsm_speed_plant(*rc.pmsm);
    }
    rc.plant.validate();

    const std::string kind = f.text_or("observer", "kind", "ifo");
    if (kind == "ifo")
        rc.observer_kind = ObserverKind::IFO;
    else if (kind == "fo")
        rc.observer_kind = ObserverKind::FO;
    else if (kind == "io")
        rc.observer_kind = ObserverKind::IO;
    else
        throw ConfigError(fmt::format("[observer] kind must be ifo, fo or io, got '{}'", kind));
    rc.n = f.integer_or("observer", "n", rc.plant.order_m());
    rc.gamma = f.number_or("observer", "gamma", rc.gamma);
    rc.omega_o = f.number_or("observer", "omega_o", rc.omega_o);
    rc.b0 = f.number_or("observer", "b0", rc.plant.gain_b);
    rc.sample_rate = f.number_or("observer", "sample_rate", rc.sample_rate);
    rc.approx_order = f.integer_or("observer", "approx_order", rc.approx_order);
    const std::string scheme = f.text_or("observer", "scheme", "gl");
    if (scheme == "gl")
        rc.scheme = ChannelScheme::gl;
    else if (scheme == "iri")
        rc.scheme = ChannelScheme::iri;
    else
        throw ConfigError(fmt::format("[observer] scheme must be gl or iri, got '{}'", scheme));

    rc.k_fp = f.number_or("controller", "k_fp", rc.k_fp);
    if (f.has("controller", "k_ip") != f.has("controller", "k_id"))
        throw ConfigError("[controller] k_ip and k_id must be given together");
    if (f.has("controller", "k_ip")) {
        rc.k_ip = f.number("controller", "k_ip");
        rc.k_id = f.number("controller", "k_id");
    }
    if (f.has("controller", "target_wc") != f.has("controller", "target_pm"))
        throw ConfigError("[controller] target_wc and target_pm must be given together");
    if (f.has("controller", "target_wc")) {
        rc.target_wc = f.number("controller", "target_wc");
        rc.target_pm = f.number("controller", "target_pm");
    }

    rc.sim.horizon = f.number_or("sim", "horizon", 1.0);
    rc.sim.step = 1.0 / rc.sample_rate;
    rc.sim.plant_substeps = f.integer_or("sim", "plant_substeps", 1);
    rc.reference = f.number_or("sim", "reference", rc.reference);
    rc.gains = f.list_or("sim", "gains", rc.gains);
    rc.settle_band_pct = f.number_or("sim", "settle_band_pct", rc.settle_band_pct);
    rc.bode_lo = f.number_or("sim", "bode_lo", rc.bode_lo);
    rc.bode_hi = f.number_or("sim", "bode_hi", rc.bode_hi);
    rc.bode_points = f.integer_or("sim", "bode_points", rc.bode_points);
    rc.mse_lo = f.number_or("sim", "mse_lo", rc.mse_lo);
    rc.mse_hi = f.number_or("sim", "mse_hi", rc.mse_hi);
    rc.mse_points = f.integer_or("sim", "mse_points", rc.mse_points);
    rc.sweep_a_o = f.list_or("sim", "sweep_a_o", {});
    rc.sweep_omega_o = f.list_or("sim", "sweep_omega_o", {});
    rc.sweep_gamma = f.list_or("sim", "sweep_gamma", {});
    return rc;
}

} // namespace fadrc::cli
