#include "mfb/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mfb/errors.hpp"

namespace mfb {
namespace {

constexpr double kPi = 3.14159265358979323846264338328;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& text, const std::string& key) {
    try {
        size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (trim(text.substr(pos)).empty()) return v;
    } catch (...) {
    }
    throw ConfigError("bad numeric value for '" + key + "': " + text);
}

int parse_int(const std::string& text, const std::string& key) {
    try {
        size_t pos = 0;
        const int v = std::stoi(text, &pos);
        if (trim(text.substr(pos)).empty()) return v;
    } catch (...) {
    }
    throw ConfigError("bad integer value for '" + key + "': " + text);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

Vec2 parse_vec2(const std::string& text, const std::string& key) {
    const auto parts = split(text, ',');
    if (parts.size() != 2) throw ConfigError("'" + key + "' expects two comma-separated reals");
    return {parse_real(parts[0], key), parse_real(parts[1], key)};
}

WeightSpec parse_hstar(const std::string& text) {
    WeightSpec w;
    const auto colon = text.find(':');
    const std::string name = trim(colon == std::string::npos ? text : text.substr(0, colon));
    const std::string args = colon == std::string::npos ? "" : trim(text.substr(colon + 1));
    if (name == "const") {
        w.kind = WeightSpec::Kind::Constant;
        w.c0 = args.empty() ? 1.0 : parse_real(args, "hstar");
        if (w.c0 <= 0.0) throw ConfigError("hstar const must be positive");
    } else if (name == "expcos") {
        w.kind = WeightSpec::Kind::ExpCos;
        const auto parts = split(args, ',');
        if (parts.size() != 2) throw ConfigError("hstar expcos expects two coefficients");
        w.c1 = parse_real(parts[0], "hstar");
        w.c2 = parse_real(parts[1], "hstar");
    } else {
        throw ConfigError("unknown hstar form '" + name + "' (use const:<v> or expcos:<c1>,<c2>)");
    }
    return w;
}

std::vector<Vortex> parse_vortices(const std::string& text) {
    std::vector<Vortex> out;
    if (trim(text).empty() || trim(text) == "none") return out;
    for (const std::string& entry : split(text, ';')) {
        if (entry.empty()) continue;
        const auto parts = split(entry, ',');
        if (parts.size() != 3)
            throw ConfigError("vortex entry expects x,y,alpha: '" + entry + "'");
        Vortex v;
        v.q = {parse_real(parts[0], "vortices"), parse_real(parts[1], "vortices")};
        const double a = parse_real(parts[2], "vortices");
        if (a < 1.0 || a != std::floor(a))
            throw ConfigError("vortex strength must be a positive integer");
        v.alpha = int(a);
        out.push_back(v);
    }
    return out;
}

} // namespace

double parse_rho(const std::string& text) {
    const std::string s = trim(text);
    const auto pi_pos = s.rfind("pi");
    if (pi_pos != std::string::npos && pi_pos == s.size() - 2) {
        const std::string num = trim(s.substr(0, pi_pos));
        return (num.empty() ? 1.0 : parse_real(num, "rho")) * kPi;
    }
    return parse_real(s, "rho");
}

ProblemConfig parse_config_text(const std::string& text) {
    ProblemConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "rho") cfg.rho = parse_rho(val);
        else if (key == "t") cfg.t = parse_real(val, key);
        else if (key == "t_list") {
            cfg.t_list.clear();
            for (const auto& s2 : split(val, ',')) cfg.t_list.push_back(parse_real(s2, key));
            if (cfg.t_list.empty()) throw ConfigError("t_list must not be empty");
        }
        else if (key == "grid_n") cfg.grid_n = parse_int(val, key);
        else if (key == "R0") cfg.R0 = parse_real(val, key);
        else if (key == "r0") cfg.r0 = parse_real(val, key);
        else if (key == "p") cfg.p = parse_real(val, key);
        else if (key == "alpha") cfg.alpha = parse_real(val, key);
        else if (key == "eps") cfg.eps = parse_real(val, key);
        else if (key == "e_dir") cfg.e_dir = parse_vec2(val, key);
        else if (key == "q0") cfg.q0 = parse_vec2(val, key);
        else if (key == "hstar") {
            const auto vort = cfg.weight.vortices;
            cfg.weight = parse_hstar(val);
            cfg.weight.vortices = vort;
        }
        else if (key == "vortices") cfg.weight.vortices = parse_vortices(val);
        else if (key == "mean_tol") cfg.mean_tol = parse_real(val, key);
        else if (key == "solver_tol") cfg.solver_tol = parse_real(val, key);
        else if (key == "newton_tol") cfg.newton_tol = parse_real(val, key);
        else if (key == "margin_tol") cfg.margin_tol = parse_real(val, key);
        else if (key == "lin_tol") cfg.lin_tol = parse_real(val, key);
        else if (key == "fp_tol") cfg.fp_tol = parse_real(val, key);
        else if (key == "c_tol") cfg.c_tol = parse_real(val, key);
        else if (key == "max_newton") cfg.max_newton = parse_int(val, key);
        else if (key == "max_fp_iter") cfg.max_fp_iter = parse_int(val, key);
        else if (key == "max_outer") cfg.max_outer = parse_int(val, key);
        else if (key == "grid_min") cfg.grid_min = parse_int(val, key);
        else if (key == "grid_max") cfg.grid_max = parse_int(val, key);
        else if (key == "grid_factor") cfg.grid_factor = parse_real(val, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }

    if (!(cfg.rho > 8.0 * kPi)) throw ConfigError("rho must exceed 8 pi");
    if (!(cfg.r0 > 0.0 && cfg.r0 < 0.5)) throw ConfigError("r0 must lie in (0, 1/2)");
    if (!(cfg.R0 > 2.0)) throw ConfigError("R0 must exceed 2");
    if (std::abs(norm(cfg.e_dir) - 1.0) > 1e-9) throw ConfigError("e_dir must be a unit vector");
    return cfg;
}

ProblemConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace mfb
