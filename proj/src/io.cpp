#include "mfb/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mfb/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "PFLD writer assumes a little-endian host");

namespace mfb {

void write_field(const std::string& path, const PeriodicField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    char header[16] = {0};
    std::memcpy(header, "PFLD", 4);
    const uint32_t n = uint32_t(f.n());
    std::memcpy(header + 4, &n, 4);
    out.write(header, 16);
    out.write(reinterpret_cast<const char*>(f.v.data()),
              std::streamsize(f.v.size() * sizeof(double)));
    if (!out) throw ConfigError("write failed for " + path);
}

PeriodicField read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    char header[16];
    in.read(header, 16);
    if (!in || std::memcmp(header, "PFLD", 4) != 0)
        throw ConfigError(path + ": not a PFLD field dump");
    uint32_t n = 0;
    std::memcpy(&n, header + 4, 4);
    PeriodicField f(make_grid(int(n)));
    in.read(reinterpret_cast<char*>(f.v.data()), std::streamsize(f.v.size() * sizeof(double)));
    if (!in) throw ConfigError(path + ": truncated field dump");
    return f;
}

namespace {

nlohmann::ordered_json report_to_json(const SolveReport& r) {
    nlohmann::ordered_json j;
    j["t"] = r.t;
    j["grid_n"] = r.grid_n;
    j["q_star"] = {r.q_star.x, r.q_star.y};
    j["lambda_tq"] = r.lambda_tq;
    j["lambda_pred"] = r.lambda_pred;
    j["lambda_meas"] = r.lambda_meas;
    j["rho_t"] = r.rho_t;
    j["sigma0"] = r.sigma0;
    j["m0"] = r.m0;
    j["pohozaev_residual"] = r.pohozaev_residual;
    j["outer_err"] = r.outer_err;
    j["eta_max_weighted"] = r.eta_max_weighted;
    j["residual"] = r.residual;
    j["mean_u"] = r.mean_u;
    j["c1"] = r.c1;
    j["c2"] = r.c2;
    j["phi_sup"] = r.phi_sup;
    j["phi_x_norm"] = r.phi_x_norm;
    j["ball_radius"] = r.ball_radius;
    j["bound_ratio"] = r.bound_ratio;
    j["contraction_factor"] = r.contraction_factor;
    j["contraction_iters"] = r.contraction_iters;
    j["adjust_iters"] = r.adjust_iters;
    j["mean_ustar"] = r.mean_ustar;
    j["ansatz_outer_dev"] = r.ansatz_outer_dev;
    j["inner_mass"] = r.inner_mass;
    j["aconst"] = r.aconst;
    j["interface_jump_c0"] = r.interface_jump_c0;
    j["interface_jump_c1"] = r.interface_jump_c1;
    j["kernel_mass_m0"] = r.km_m0;
    j["kernel_mass_m1"] = r.km_m1;
    j["kernel_mass_m2"] = r.km_m2;
    j["margin"] = r.margin;
    j["sigma0_curve_r"] = r.sigma0_curve_r;
    j["sigma0_curve"] = r.sigma0_curve;
    return j;
}

nlohmann::ordered_json fit_to_json(const FitResult& f) {
    return {{"exponent", f.exponent}, {"half_width", f.half_width}, {"offset", f.offset}};
}

} // namespace

std::string report_json(const SolveReport& r) { return report_to_json(r).dump(2) + "\n"; }

std::string sweep_json(const SweepResult& s) {
    nlohmann::ordered_json j;
    j["t_values"] = s.ts;
    j["grids"] = s.grids;
    j["failures"] = s.failures;
    j["reports"] = nlohmann::ordered_json::array();
    for (const auto& r : s.reports) j["reports"].push_back(report_to_json(r));
    j["fit_mean_ustar"] = fit_to_json(s.fit_mean_ustar);
    j["fit_rho_t"] = fit_to_json(s.fit_rho_t);
    j["fit_outer"] = fit_to_json(s.fit_outer);
    j["fit_lambda_gap"] = fit_to_json(s.fit_lambda_gap);
    return j.dump(2) + "\n";
}

std::string base_json(const BaseState& s) {
    nlohmann::ordered_json j;
    j["rho"] = s.rho;
    j["residual"] = s.residual;
    j["margin"] = s.margin;
    j["newton_iters"] = s.newton_iters;
    j["residual_history"] = s.residual_history;
    j["int_h_ew"] = s.int_h_ew;
    return j.dump(2) + "\n";
}

std::string sweep_csv(const SweepResult& s) {
    std::ostringstream out;
    out.precision(12);
    out << "t,grid_n,lambda_pred,lambda_meas,rho_t,outer_err,mean_ustar,aconst,residual\n";
    for (size_t i = 0; i < s.reports.size(); ++i) {
        const SolveReport& r = s.reports[i];
        out << r.t << ',' << r.grid_n << ',' << r.lambda_pred << ',' << r.lambda_meas << ','
            << r.rho_t << ',' << r.outer_err << ',' << r.mean_ustar << ',' << r.aconst << ','
            << r.residual << "\n";
    }
    out << "# fit_mean_ustar_exponent," << s.fit_mean_ustar.exponent << "\n";
    out << "# fit_rho_t_exponent," << s.fit_rho_t.exponent << "\n";
    out << "# fit_outer_exponent," << s.fit_outer.exponent << "\n";
    out << "# fit_lambda_gap_exponent," << s.fit_lambda_gap.exponent << "\n";
    return out.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw ConfigError("write failed for " + path);
}

} // namespace mfb
