// Command-line front end: greens-test, base-solve, ansatz, solve, sweep,
// diagnose.  Exit codes: 0 success, 2 config error, 3 solver failure,
// 4 under-resolved.
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "mfb/diagnostics.hpp"
#include "mfb/errors.hpp"
#include "mfb/io.hpp"
#include "mfb/liouville.hpp"

namespace {

using nlohmann::ordered_json;

mfb::ProblemConfig load_config(const std::string& path) {
    if (path.empty()) return mfb::ProblemConfig{};
    return mfb::parse_config_file(path);
}

int cmd_greens_test(const std::string& config_path, int n_override, const std::string& out) {
    mfb::ProblemConfig cfg = load_config(config_path);
    const int n = n_override > 0 ? n_override : 512;
    mfb::Greens greens(mfb::make_grid(n));

    ordered_json j;
    j["n"] = n;
    j["robin_constant"] = greens.robin();

    const mfb::Vec2 p{0.3125, 0.1875};
    mfb::PeriodicField gp = greens.green(p);
    j["mean_green"] = mfb::integrate(gp);

    // symmetry and translation invariance on node sources
    const mfb::Vec2 a = greens.grid.node(n / 4, n / 8);
    const mfb::Vec2 b = greens.grid.node(5 * n / 8, n / 2 + n / 16);
    mfb::PeriodicField ga = greens.green(a), gb = greens.green(b);
    j["symmetry_error"] = std::abs(mfb::interpolate(ga, b) - mfb::interpolate(gb, a));
    mfb::PeriodicField g0 = greens.green({0.0, 0.0});
    double terr = 0.0;
    for (int s = 0; s < 8; ++s) {
        const int i = (s * 37) % n, jj = (s * 91) % n;
        const int ia = (i + n / 4) % n, ja = (jj + n / 8) % n;
        terr = std::max(terr, std::abs(ga.at(ia, ja) - g0.at(i, jj)));
    }
    j["translation_error"] = terr;

    const std::string text = j.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        mfb::write_text(out, text);
    return 0;
}

int cmd_base_solve(const std::string& config_path, const std::string& prefix) {
    mfb::ProblemConfig cfg = load_config(config_path);
    const int n = cfg.grid_n > 0 ? cfg.grid_n : 256;
    mfb::Greens greens(mfb::make_grid(n));
    const mfb::PeriodicField h = mfb::assemble_h(cfg.weight, greens);
    const mfb::BaseState base =
        mfb::solve_base(cfg.rho, h, mfb::PeriodicField(greens.grid),
                        mfb::NewtonOptions{cfg.newton_tol, cfg.max_newton, 1e-13, 400});
    mfb::write_field(prefix + ".pfld", base.w);
    mfb::write_text(prefix + ".json", mfb::base_json(base));
    std::cout << "base solve: residual " << base.residual << ", margin " << base.margin << ", "
              << base.newton_iters << " Newton steps\n";
    return 0;
}

int cmd_ansatz(const std::string& config_path, const std::string& out) {
    mfb::ProblemConfig cfg = load_config(config_path);
    const int n = mfb::choose_grid(cfg, cfg.t);
    const mfb::Grid grid = mfb::make_grid(n);
    mfb::Greens greens(grid);
    const mfb::PeriodicField h = mfb::assemble_h(cfg.weight, greens);
    const mfb::BaseState base =
        mfb::solve_base(cfg.rho, h, mfb::PeriodicField(grid),
                        mfb::NewtonOptions{cfg.newton_tol, cfg.max_newton, 1e-13, 400});
    const mfb::CollapsePair cp = mfb::make_collapse_pair(cfg.t, cfg.e_dir, cfg.r0);
    const mfb::CollapseFields pair(greens, cp);
    const mfb::Interpolator w_itp(base.w);
    const mfb::ProblemCtx ctx{greens, cfg.weight, h,       base,   pair,
                              w_itp,  cfg.rho,    cfg.R0,  cfg.r0};
    const mfb::BubbleParams bp = mfb::derive_params(ctx, cfg.q0);
    const mfb::Ansatz ansatz = mfb::assemble_ansatz(ctx, bp);
    const mfb::MassSplit ms = mfb::ansatz_mass_split(ctx, ansatz);

    ordered_json j;
    j["t"] = bp.t;
    j["q"] = {bp.q.x, bp.q.y};
    j["grid_n"] = n;
    j["lambda"] = bp.lambda;
    j["C"] = bp.C;
    j["Lambda"] = bp.Lambda;
    j["Gamma"] = bp.Gamma;
    j["theta"] = bp.theta;
    j["Bconst"] = bp.Bconst;
    j["Aconst"] = ms.Aconst;
    j["mean_ustar"] = ansatz.mean_ustar;
    j["interface_jump_c0"] = ansatz.interface_jump_c0;
    j["interface_jump_c1"] = ansatz.interface_jump_c1;
    j["inner_mass"] = ms.inner_mass;
    j["outer_density_err"] = ms.outer_density_err;
    const std::string text = j.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        mfb::write_text(out, text);
    return 0;
}

int cmd_solve(const std::string& config_path, const std::string& prefix) {
    mfb::ProblemConfig cfg = load_config(config_path);
    const int n = mfb::choose_grid(cfg, cfg.t);
    auto run = mfb::solve_single(cfg, cfg.t, n);
    mfb::write_field(prefix + ".pfld", run->u);
    mfb::write_text(prefix + ".json", mfb::report_json(run->report));
    std::cout << "solve t=" << cfg.t << " n=" << n << ": residual " << run->report.residual
              << ", |c| = (" << run->report.c1 << ", " << run->report.c2 << "), q* = ("
              << run->report.q_star.x << ", " << run->report.q_star.y << ")\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& prefix) {
    mfb::ProblemConfig cfg = load_config(config_path);
    const mfb::SweepResult sw = mfb::run_sweep(cfg);
    mfb::write_text(prefix + ".json", mfb::sweep_json(sw));
    mfb::write_text(prefix + ".csv", mfb::sweep_csv(sw));
    int failures = 0;
    for (const auto& f : sw.failures)
        if (!f.empty()) ++failures;
    std::cout << "sweep: " << (sw.ts.size() - failures) << "/" << sw.ts.size()
              << " points succeeded; exponents: mean_ustar " << sw.fit_mean_ustar.exponent
              << ", rho_t " << sw.fit_rho_t.exponent << ", outer " << sw.fit_outer.exponent
              << ", lambda_gap " << sw.fit_lambda_gap.exponent << "\n";
    return failures == 0 ? 0 : 3;
}

int cmd_diagnose(const std::string& config_path, const std::string& field_path,
                 const std::string& qstr, const std::string& out) {
    mfb::ProblemConfig cfg = load_config(config_path);
    mfb::PeriodicField u = mfb::read_field(field_path);
    const int n = u.n();
    mfb::Greens greens(mfb::make_grid(n));
    const mfb::PeriodicField h = mfb::assemble_h(cfg.weight, greens);
    const mfb::BaseState base =
        mfb::solve_base(cfg.rho, h, mfb::PeriodicField(greens.grid),
                        mfb::NewtonOptions{cfg.newton_tol, cfg.max_newton, 1e-13, 400});
    const mfb::CollapsePair cp = mfb::make_collapse_pair(cfg.t, cfg.e_dir, cfg.r0);
    const mfb::CollapseFields pair(greens, cp);
    const mfb::Interpolator w_itp(base.w);
    const mfb::ProblemCtx ctx{greens, cfg.weight, h,      base,  pair,
                              w_itp,  cfg.rho,    cfg.R0, cfg.r0};
    mfb::Vec2 q = cfg.q0;
    if (!qstr.empty()) {
        const auto comma = qstr.find(',');
        if (comma == std::string::npos) throw mfb::ConfigError("--q expects x,y");
        q = {std::stod(qstr.substr(0, comma)), std::stod(qstr.substr(comma + 1))};
    }
    const mfb::BubbleParams bp = mfb::derive_params(ctx, q);
    const mfb::PohozaevCheck pc = mfb::pohozaev_check(ctx, u, bp);
    const mfb::ProfileFit pf = mfb::profile_fit(ctx, u, bp, cfg.eps);

    ordered_json j;
    j["t"] = cfg.t;
    j["grid_n"] = n;
    j["rho_t"] = mfb::local_mass(ctx, u, q, cfg.t * cfg.R0);
    j["sigma0"] = pc.sigma0;
    j["m0"] = pc.m0;
    j["pohozaev_residual"] = pc.residual;
    j["lambda_meas"] = pf.lambda_meas;
    j["p_t"] = {pf.p_t.x, pf.p_t.y};
    j["eta_max_weighted"] = pf.eta_max_weighted;
    j["outer_err"] = mfb::outer_error(ctx, u, q, cfg.R0);
    const std::string text = j.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        mfb::write_text(out, text);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"collapsing-vortex mean field laboratory"};
    app.require_subcommand(1);

    std::string config_path, out, prefix = "out", field_path, qstr;
    int n_override = 0;

    auto* greens_cmd = app.add_subcommand("greens-test", "Green's function identity battery");
    greens_cmd->add_option("--config", config_path, "config file");
    greens_cmd->add_option("--n", n_override, "grid size override");
    greens_cmd->add_option("--out", out, "JSON output path (default stdout)");

    auto* base_cmd = app.add_subcommand("base-solve", "solve the reduced mean field equation");
    base_cmd->add_option("--config", config_path, "config file");
    base_cmd->add_option("--out-prefix", prefix, "output prefix (.pfld/.json)");

    auto* ansatz_cmd = app.add_subcommand("ansatz", "assemble and report the approximate solution");
    ansatz_cmd->add_option("--config", config_path, "config file");
    ansatz_cmd->add_option("--out", out, "JSON output path (default stdout)");

    auto* solve_cmd = app.add_subcommand("solve", "full single-t pipeline");
    solve_cmd->add_option("--config", config_path, "config file");
    solve_cmd->add_option("--out-prefix", prefix, "output prefix (.pfld/.json)");

    auto* sweep_cmd = app.add_subcommand("sweep", "t-sweep with rate fits");
    sweep_cmd->add_option("--config", config_path, "config file");
    sweep_cmd->add_option("--out-prefix", prefix, "output prefix (.json/.csv)");

    auto* diag_cmd = app.add_subcommand("diagnose", "diagnostics on a stored solution field");
    diag_cmd->add_option("--config", config_path, "config file");
    diag_cmd->add_option("--field", field_path, "PFLD solution dump")->required();
    diag_cmd->add_option("--q", qstr, "bubble location q as x,y (default config q0)");
    diag_cmd->add_option("--out", out, "JSON output path (default stdout)");

    try {
        app.parse(argc, argv);
        if (greens_cmd->parsed()) return cmd_greens_test(config_path, n_override, out);
        if (base_cmd->parsed()) return cmd_base_solve(config_path, prefix);
        if (ansatz_cmd->parsed()) return cmd_ansatz(config_path, out);
        if (solve_cmd->parsed()) return cmd_solve(config_path, prefix);
        if (sweep_cmd->parsed()) return cmd_sweep(config_path, prefix);
        if (diag_cmd->parsed()) return cmd_diagnose(config_path, field_path, qstr, out);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const mfb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const mfb::UnderResolvedError& e) {
        std::cerr << "under-resolved: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
