// gausscone: command-line front end.
//
// Exit codes: 0 success, 2 not converged / check failed, 3 input error.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "gausscone.hpp"

using namespace gausscone;
using io::json;

namespace {

constexpr int kExitNotConverged = 2;
constexpr int kExitInputError = 3;

std::shared_ptr<spdlog::logger> make_logger() {
    auto log = spdlog::stderr_color_mt("gausscone");
    log->set_pattern("%^%l%$: %v");
    const char* env = std::getenv("GAUSSCONE_LOG");
    const std::string level = env ? env : "info";
    if (level == "error") {
        log->set_level(spdlog::level::err);
    } else if (level == "debug") {
        log->set_level(spdlog::level::debug);
    } else {
        log->set_level(spdlog::level::info);
        if (level != "info") log->warn("unknown GAUSSCONE_LOG value '{}', using info", level);
    }
    return log;
}

void emit(const json& doc, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << doc.dump(2) << '\n';
    } else {
        io::write_json(out, doc);
    }
}

io::LoadedInstance load_logged(const std::string& path, spdlog::logger& log) {
    auto li = io::load_instance(path);
    for (const auto& w : li.warnings) log.warn("{}", w);
    return li;
}

Direction parse_direction(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            values.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ParseError("--dir", "not a number: '" + cell + "'");
        }
    }
    Vec v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t k = 0; k < values.size(); ++k) v[static_cast<Eigen::Index>(k)] = values[k];
    return Direction::normalized(v);
}

} // namespace

int main(int argc, char** argv) {
    auto log = make_logger();
    CLI::App app{"Discrete Gauss image problem for C-pseudo-cones"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a random instance");
    int gen_n = 2, gen_ml = 3, gen_mm = 3;
    std::uint64_t gen_seed = 1;
    bool gen_unbalanced = false, gen_planted = false;
    std::string gen_out;
    gen->add_option("--n", gen_n, "Dimension")->check(CLI::Range(2, 64));
    gen->add_option("--m-lambda", gen_ml, "Number of lambda atoms")->check(CLI::PositiveNumber);
    gen->add_option("--m-mu", gen_mm, "Number of mu atoms")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_flag("--unbalanced", gen_unbalanced, "Keep raw random weights instead of unit total masses");
    gen->add_flag("--planted", gen_planted, "Make mu the pushforward of lambda under a random pseudo-cone");
    gen->add_option("--out", gen_out, "Output file (default stdout)");

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "Solve an instance");
    std::string solve_in, solve_out, solve_plot, solve_gauge = "mean-zero";
    std::optional<double> solve_tol, solve_tau;
    std::optional<int> solve_iter;
    std::optional<std::uint64_t> solve_seed;
    solve_cmd->add_option("instance", solve_in, "Instance JSON")->required();
    solve_cmd->add_option("--tol", solve_tol, "Residual tolerance (default 1e-6)");
    solve_cmd->add_option("--max-iter", solve_iter, "Iteration limit (default 200000)");
    solve_cmd->add_option("--seed", solve_seed, "Random-normal initialization seed");
    solve_cmd->add_option("--tau", solve_tau, "Initial warm-start temperature, 0 disables (default 0.1)");
    solve_cmd->add_option("--gauge", solve_gauge, "Output gauge")->check(CLI::IsMember({"mean-zero", "unit-distance"}));
    solve_cmd->add_option("--out", solve_out, "Result file (default stdout)");
    solve_cmd->add_option("--plot", solve_plot, "Write plot CSV here");

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "Recompute the Gauss image measure of a pseudo-cone");
    std::string verify_in, verify_k, verify_out;
    double verify_tol = 1e-6;
    verify_cmd->add_option("instance", verify_in, "Instance JSON")->required();
    verify_cmd->add_option("--k", verify_k, "Result JSON or V-rep pseudo-cone JSON")->required();
    verify_cmd->add_option("--tol", verify_tol, "Pass tolerance");
    verify_cmd->add_option("--out", verify_out, "Report file (default stdout)");

    // pushforward
    auto* push_cmd = app.add_subcommand("pushforward", "Pushforward of lambda under a pseudo-cone");
    std::string push_in, push_k, push_out;
    push_cmd->add_option("instance", push_in, "Instance JSON")->required();
    push_cmd->add_option("--k", push_k, "Result JSON or V-rep pseudo-cone JSON")->required();
    push_cmd->add_option("--out", push_out, "Output file (default stdout)");

    // dual
    auto* dual_cmd = app.add_subcommand("dual", "Copolar of a pseudo-cone");
    std::string dual_in, dual_out;
    dual_cmd->add_option("pseudocone", dual_in, "Pseudo-cone JSON")->required();
    dual_cmd->add_option("--out", dual_out, "Output file (default stdout)");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate radial/support functions or the Gauss maps");
    std::string eval_in, eval_out, eval_what = "radial";
    std::vector<std::string> eval_dirs;
    eval_cmd->add_option("pseudocone", eval_in, "Pseudo-cone JSON")->required();
    eval_cmd->add_option("--what", eval_what, "Quantity")->check(CLI::IsMember({"radial", "support", "gauss", "reverse-gauss"}));
    eval_cmd->add_option("--dir", eval_dirs, "Direction as comma-separated coordinates (normalized)")->required();
    eval_cmd->add_option("--out", eval_out, "Output file (default stdout)");

    // audit
    auto* audit_cmd = app.add_subcommand("audit", "Run the independent cross-checks");
    std::vector<std::string> audit_checks{"duality", "variation", "subgradient", "oracle"};
    int audit_samples = 1000;
    std::uint64_t audit_seed = 1;
    std::string audit_instance, audit_k, audit_out;
    audit_cmd->add_option("--checks", audit_checks, "Checks to run")
        ->delimiter(',')
        ->check(CLI::IsMember({"duality", "variation", "subgradient", "oracle"}));
    audit_cmd->add_option("--samples", audit_samples, "Samples per check")->check(CLI::PositiveNumber);
    audit_cmd->add_option("--seed", audit_seed, "Seed");
    audit_cmd->add_option("--instance", audit_instance, "Instance JSON (default: generated from the seed)");
    audit_cmd->add_option("--k", audit_k, "Pseudo-cone JSON for the duality check (default: from the instance)");
    audit_cmd->add_option("--out", audit_out, "Report file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInputError;
    }

    try {
        if (*gen) {
            const auto inst = gen_planted ? generate_planted_instance(gen_n, gen_ml, gen_mm, gen_seed)
                                          : generate_instance(gen_n, gen_ml, gen_mm, gen_seed, !gen_unbalanced);
            emit(io::to_json(inst), gen_out);
            return 0;
        }

        if (*solve_cmd) {
            const auto li = load_logged(solve_in, *log);
            const auto p = li.problem();
            SolveConfig cfg = li.config.value_or(SolveConfig{});
            if (solve_tol) cfg.tol = *solve_tol;
            if (solve_iter) cfg.max_iter = *solve_iter;
            if (solve_seed) cfg.seed = *solve_seed;
            if (solve_tau) cfg.tau = *solve_tau;
            cfg.observer = [&log](int k, double best) {
                if (k % 10000 == 0) log->debug("iteration {} best phi {:.17g}", k, best);
            };
            auto r = solve(p, cfg);
            log->info("{} after {} iterations, residual {:.3g}, certified {}", r.converged ? "converged" : "not converged",
                      r.iterations, r.residual_linf, r.certified);
            if (!solve_plot.empty()) {
                const auto boundary = io::emit_plot_data(r, p, solve_plot);
                log->info("plot data in {}{}", solve_plot, boundary.empty() ? "" : " and " + boundary);
            }
            if (solve_gauge == "unit-distance") {
                const double d = distance_to_origin(p.pseudo_cone(r.log_radii));
                r.log_radii.array() -= std::log(d);
                r.phi = phi_value(r.log_radii, p);
            }
            emit(io::to_json(r, solve_gauge), solve_out);
            return r.converged ? 0 : kExitNotConverged;
        }

        if (*verify_cmd) {
            const auto li = load_logged(verify_in, *log);
            const auto p = li.problem();
            const auto k = io::pseudo_cone_for(io::read_json(verify_k), p);
            const auto rep = verify(k, p, verify_tol);
            emit({{"masses", rep.masses},
                  {"target", rep.target},
                  {"vertex_residuals", rep.vertex_residuals},
                  {"max_residual", rep.max_residual},
                  {"split_residual", rep.split_residual},
                  {"ties", rep.ties},
                  {"passed", rep.passed}},
                 verify_out);
            return rep.passed ? 0 : kExitNotConverged;
        }

        if (*push_cmd) {
            const auto li = load_logged(push_in, *log);
            const auto p = li.problem();
            const auto k = io::pseudo_cone_for(io::read_json(push_k), p);
            const auto rep = pushforward(k, p.lambda());
            emit({{"masses", rep.masses}, {"ties", rep.ties}, {"assignment", rep.assignment}}, push_out);
            return 0;
        }

        if (*dual_cmd) {
            const auto doc = io::load_pseudo_cone(dual_in);
            emit(doc.is_v() ? io::to_json(copolar(*doc.v)) : io::to_json(copolar(*doc.h)), dual_out);
            return 0;
        }

        if (*eval_cmd) {
            const auto doc = io::load_pseudo_cone(eval_in);
            json values = json::array();
            for (const auto& text : eval_dirs) {
                const Direction d = parse_direction(text);
                json entry = {{"direction", io::detail::to_json(d.coords())}};
                if (eval_what == "radial") {
                    entry["value"] = doc.is_v() ? radial_value(*doc.v, d) : radial_value(*doc.h, d);
                } else if (eval_what == "support") {
                    entry["value"] = doc.is_v() ? support_value(*doc.v, d) : support_value(*doc.h, d);
                } else {
                    if (!doc.is_v()) throw ParseError("/rep", "Gauss maps need a V-rep pseudo-cone");
                    if (eval_what == "gauss") {
                        const auto g = radial_gauss(*doc.v, d);
                        entry["normal"] = io::detail::to_json(g.normal.coords());
                        entry["unique"] = g.unique;
                    } else {
                        const auto a = reverse_radial_gauss(*doc.v, d);
                        entry["vertex"] = a.index;
                        entry["tie"] = a.tie;
                        entry["candidates"] = a.candidates;
                    }
                }
                values.push_back(entry);
            }
            emit({{"what", eval_what}, {"values", values}}, eval_out);
            return 0;
        }

        if (*audit_cmd) {
            const auto li = audit_instance.empty()
                                ? io::LoadedInstance{generate_instance(2, 6, 3, audit_seed, true), std::nullopt, {}}
                                : load_logged(audit_instance, *log);
            const auto p = li.problem();
            json report = json::object();
            bool clean = true;
            auto has = [&](const char* c) { return std::find(audit_checks.begin(), audit_checks.end(), c) != audit_checks.end(); };

            if (has("duality")) {
                std::optional<io::PseudoConeDoc> k;
                if (!audit_k.empty()) k = io::load_pseudo_cone(audit_k);
                oracle::AuditOptions opt;
                opt.samples = audit_samples;
                const auto rep = k ? (k->is_v() ? oracle::dense_duality_audit(*k->v, audit_seed, opt)
                                                : oracle::dense_duality_audit(*k->h, audit_seed, opt))
                                   : oracle::dense_duality_audit(p.pseudo_cone(Vec::Zero(p.mu_size())), audit_seed, opt);
                clean = clean && rep.passed();
                report["duality"] = {{"checks", rep.checks},
                                     {"violations", rep.violations},
                                     {"max_exact_error", rep.max_exact_error},
                                     {"max_inf_gap", rep.max_inf_gap},
                                     {"min_inf_gap", rep.min_inf_gap},
                                     {"max_cloud_gap", rep.max_cloud_gap},
                                     {"messages", rep.messages}};
            }
            if (has("variation")) {
                const Cone& c = p.cone();
                std::vector<double> f0, g;
                std::mt19937_64 rng(audit_seed);
                std::uniform_real_distribution<double> uf(0.5, 2.0), ug(-1.0, 1.0);
                for (int j = 0; j < p.lambda_size(); ++j) f0.push_back(uf(rng)), g.push_back(ug(rng));
                const auto rep = oracle::wulff_variation_check(c, p.lambda().directions(), f0, g, {1e-2, 1e-3, 1e-4},
                                                               audit_samples, rng());
                clean = clean && rep.linear_decrease;
                report["variation"] = {{"t_values", rep.t_values},
                                       {"max_error", rep.max_error},
                                       {"empirical_constant", rep.empirical_constant},
                                       {"used", rep.used},
                                       {"excluded_kinks", rep.excluded_kinks},
                                       {"linear_decrease", rep.linear_decrease}};
            }
            if (has("subgradient")) {
                std::mt19937_64 rng(audit_seed);
                std::normal_distribution<double> normal;
                double worst = 0.0;
                int done = 0, tied = 0;
                for (int s = 0; s < audit_samples && done < 20; ++s) {
                    Vec x(p.mu_size());
                    for (int i = 0; i < x.size(); ++i) x[i] = normal(rng);
                    try {
                        worst = std::max(worst, oracle::fd_check_subgradient(p, x, 1e-4, 1e-6));
                        ++done;
                    } catch (const TiedPoint&) {
                        ++tied;
                    }
                }
                clean = clean && worst <= 1e-5;
                report["subgradient"] = {{"points", done}, {"tied_skipped", tied}, {"max_deviation", worst}, {"passed", worst <= 1e-5}};
            }
            if (has("oracle")) {
                if (p.mu_size() > oracle::kMaxGridAtoms) {
                    report["oracle"] = {{"skipped", "more than 4 mu atoms"}};
                } else {
                    oracle::GridSpec grid;
                    if (p.mu_size() == 4) grid.step = 0.05;
                    const auto g = oracle::grid_search_phi(p, grid);
                    const auto r = solve(p);
                    const double gap = std::abs(g.phi_best - r.phi);
                    const bool ok = g.phi_best >= r.phi - 1e-9 && gap <= oracle::grid_bound(grid) + 1e-9;
                    clean = clean && ok;
                    report["oracle"] = {{"grid_phi", g.phi_best}, {"solver_phi", r.phi}, {"gap", gap},
                                        {"evaluated", g.evaluated}, {"passed", ok}};
                }
            }
            report["passed"] = clean;
            emit(report, audit_out);
            return clean ? 0 : kExitNotConverged;
        }
    } catch (const ParseError& e) {
        log->error("{}", e.what());
        return kExitInputError;
    } catch (const Error& e) {
        log->error("{}", e.what());
        return kExitInputError;
    }
    return 0;
}
