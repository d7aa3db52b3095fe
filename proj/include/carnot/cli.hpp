#ifndef CARNOT_CLI_HPP
#define CARNOT_CLI_HPP

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "carnot/builtins.hpp"
#include "carnot/deformation.hpp"
#include "carnot/distance.hpp"
#include "carnot/errors.hpp"
#include "carnot/filtration.hpp"
#include "carnot/geodesics.hpp"
#include "carnot/jmap.hpp"
#include "carnot/mcp.hpp"
#include "carnot/report.hpp"
#include "carnot/spec_format.hpp"
#include "carnot/structure_constants.hpp"

namespace carnot {
namespace cli {

struct RunConfig {
  std::string command;
  std::string spec_source;  // builtin name or file path
  std::uint64_t seed = 0;
  long budget = 2000;
  std::string output_path;  // empty = stdout
  std::string format = "text";
};

namespace detail {

inline Eigen::VectorXd parse_csv_vector(const std::string& text) {
  std::vector<double> vals;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw DomainError("bad vector entry '" + token + "'");
    }
  }
  if (vals.empty()) throw DomainError("empty vector argument");
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<long>(vals.size()));
}

inline GroupPoint parse_point(const StructureConstants& sc, const std::string& text) {
  const Eigen::VectorXd v = parse_csv_vector(text);
  if (v.size() != sc.n())
    throw DomainError("point needs " + std::to_string(sc.n()) + " comma-separated entries (m=" +
                      std::to_string(sc.m()) + " first-layer, then d2=" + std::to_string(sc.d2()) +
                      ")");
  return GroupPoint::from_coords(sc.m(), sc.d2(), v);
}

inline Covector parse_covector(const StructureConstants& sc, const std::string& text) {
  const Eigen::VectorXd v = parse_csv_vector(text);
  if (v.size() != sc.n())
    throw DomainError("covector needs " + std::to_string(sc.n()) + " comma-separated entries");
  return Covector::from_coords(sc.m(), sc.d2(), v);
}

inline int emit(const RunConfig& cfg, const std::string& body, std::ostream& out) {
  if (cfg.output_path.empty()) {
    out << body;
    return 0;
  }
  std::ofstream file(cfg.output_path, std::ios::binary);
  if (!file) throw DomainError("cannot open output path: " + cfg.output_path);
  file << body;
  return 0;
}

/// Loads and gates the spec: every command except `validate` refuses to run
/// on an invalid one.
inline StructureConstants load_checked(const RunConfig& cfg, bool gate, std::ostream& err,
                                       bool& valid) {
  StructureConstants sc = resolve_spec_source(cfg.spec_source);
  const ValidationReport rep = validate_spec(sc);
  valid = rep.ok();
  if (gate && !valid) {
    err << "invalid group spec: " << rep.message << "\n";
  }
  return sc;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"numerical toolkit for step-two Carnot groups"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string p_text, q_text, u_text, lambda_text, method_text = "both";
  double t_value = 1.0;
  long mcp_samples = 1000;
  long pair_count = 10;
  std::vector<long> k_list;

  auto add_common = [&cfg](CLI::App* cmd, bool with_spec) {
    if (with_spec)
      cmd->add_option("--spec", cfg.spec_source,
                      "group spec: file path or builtin (heisenberg, gk:<k>, gk:inf)")
          ->required();
    cmd->add_option("--seed", cfg.seed, "random seed (default 0)");
    cmd->add_option("--budget", cfg.budget, "search budget (default 2000)");
    cmd->add_option("--output", cfg.output_path, "write the report to this path");
    cmd->add_option("--format", cfg.format, "report format: text or csv")
        ->check(CLI::IsMember({"text", "csv"}));
  };

  CLI::App* c_validate = app.add_subcommand("validate", "check the step-two Carnot axioms");
  add_common(c_validate, true);
  CLI::App* c_info = app.add_subcommand("info", "dimensions and Metivier verdict");
  add_common(c_info, true);
  CLI::App* c_n0 = app.add_subcommand("n0", "search for the invariant N_0");
  add_common(c_n0, true);
  CLI::App* c_jmap = app.add_subcommand("jmap", "print the matrix of J_u");
  add_common(c_jmap, true);
  c_jmap->add_option("--u", u_text, "second-layer vector, d2 comma-separated entries")->required();
  CLI::App* c_dist = app.add_subcommand("dist", "Carnot-Caratheodory distance");
  add_common(c_dist, true);
  c_dist->add_option("--p", p_text, "start point, n comma-separated coordinates")->required();
  c_dist->add_option("--q", q_text, "end point, n comma-separated coordinates")->required();
  c_dist->add_option("--method", method_text, "shooting, control, or both")
      ->check(CLI::IsMember({"shooting", "control", "both"}));
  CLI::App* c_exp = app.add_subcommand("exp", "evaluate the exponential map");
  add_common(c_exp, true);
  c_exp->add_option("--lambda", lambda_text, "covector, n comma-separated coordinates")->required();
  c_exp->add_option("--t", t_value, "time in [0, 1] (default 1)");
  CLI::App* c_mcp = app.add_subcommand("mcp", "empirical curvature-exponent lower bound");
  add_common(c_mcp, true);
  c_mcp->add_option("--samples", mcp_samples, "number of seeded covectors (default 1000)");
  CLI::App* c_family = app.add_subcommand("family", "deformation family experiments");
  c_family->require_subcommand(1);
  CLI::App* c_conv = c_family->add_subcommand("converge", "distance convergence d_k -> d_inf");
  add_common(c_conv, false);
  c_conv->add_option("--pairs", pair_count, "number of seeded point pairs (default 10)");
  c_conv->add_option("--k-list", k_list, "family indices (default 1,2,4,8,16,32,64)")
      ->delimiter(',');
  CLI::App* c_semi = c_family->add_subcommand("semicontinuity", "the N_0 jump at the limit");
  add_common(c_semi, false);
  c_semi->add_option("--k-list", k_list, "family indices (default 1,2,4,8,16,32,64)")
      ->delimiter(',');

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    err << "run with --help for usage\n";
    return 3;
  }

  const bool csv = cfg.format == "csv";

  try {
    std::ostringstream body;

    if (c_validate->parsed()) {
      const StructureConstants sc = resolve_spec_source(cfg.spec_source);
      const ValidationReport rep = validate_spec(sc);
      write_report_header(body, "validate", cfg.spec_source, sc, cfg.seed, cfg.budget);
      if (csv) {
        body << "check,result\n";
        body << "dimensions," << (rep.dims_ok ? "pass" : "fail") << "\n";
        body << "antisymmetry," << (rep.antisymmetry_ok ? "pass" : "fail") << "\n";
        body << "bracket-generating," << (rep.bracket_generating_ok ? "pass" : "fail") << "\n";
        body << "valid," << (rep.ok() ? "yes" : "no") << "\n";
      } else {
        body << "dimensions: " << (rep.dims_ok ? "pass" : "fail") << "\n";
        body << "antisymmetry: " << (rep.antisymmetry_ok ? "pass" : "fail") << "\n";
        body << "bracket-generating: " << (rep.bracket_generating_ok ? "pass" : "fail")
             << " (rank " << rep.pair_rank << " of " << sc.d2() << ")\n";
        body << "result: " << (rep.ok() ? "valid" : "invalid") << "\n";
        if (!rep.ok()) body << "message: " << rep.message << "\n";
      }
      detail::emit(cfg, body.str(), out);
      return rep.ok() ? 0 : 1;
    }

    if (c_info->parsed()) {
      bool valid = false;
      const StructureConstants sc = detail::load_checked(cfg, true, err, valid);
      if (!valid) return 1;
      write_report_header(body, "info", cfg.spec_source, sc, cfg.seed, cfg.budget);
      const MetivierVerdict v =
          metivier_check(sc, static_cast<int>(std::min<long>(cfg.budget, 256)), cfg.seed);
      const Dims d = dims(sc);
      if (csv) {
        body << "key,value\n";
        body << "m," << sc.m() << "\nd2," << sc.d2() << "\nn," << d.n << "\nQ," << d.Q << "\n";
        body << "metivier," << to_string(v.status) << "\n";
        body << "metivier-min-sigma," << g17(v.min_sigma) << "\n";
      } else {
        body << "m: " << sc.m() << "\nd2: " << sc.d2() << "\nn: " << d.n << "\nQ: " << d.Q << "\n";
        body << "metivier: " << to_string(v.status) << "\n";
        body << "metivier-min-sigma: " << g17(v.min_sigma) << "\n";
        body << "metivier-starts: " << v.starts_run << "\n";
        body << "metivier-certificate: " << v.certificate << "\n";
        if (v.witness) body << "metivier-witness: " << join_coords(*v.witness) << "\n";
      }
      detail::emit(cfg, body.str(), out);
      return v.status == MetivierStatus::Inconclusive ? 2 : 0;
    }

    if (c_n0->parsed()) {
      bool valid = false;
      const StructureConstants sc = detail::load_checked(cfg, true, err, valid);
      if (!valid) return 1;
      write_report_header(body, "n0", cfg.spec_source, sc, cfg.seed, cfg.budget);
      const MetivierVerdict v = metivier_check(sc, 64, cfg.seed);
      const N0SearchResult res = n0_search(sc, cfg.budget, cfg.seed);
      const bool exact = v.status == MetivierStatus::Metivier;
      if (csv) {
        body << "key,value\n";
        body << "metivier," << to_string(v.status) << "\n";
        if (res.found) {
          body << "n0," << res.best_value << "\n";
          body << "n0-kind," << (exact ? "exact" : "lower-bound") << "\n";
          body << "argmax," << join_coords(res.argmax.coords()) << "\n";
        }
        body << "samples," << res.samples_evaluated << "\n";
      } else {
        body << "metivier: " << to_string(v.status) << "\n";
        if (res.found) {
          body << "n0: " << res.best_value << "\n";
          body << "n0-kind: "
               << (exact ? "exact (Metivier groups attain N_0 = 2Q - n everywhere)"
                         : "lower-bound (max over candidate set)")
               << "\n";
          body << "argmax: " << join_coords(res.argmax.coords()) << "\n";
        } else {
          body << "n0: none (no finite N(p) among candidates)\n";
        }
        body << "samples: " << res.samples_evaluated << "\n";
      }
      detail::emit(cfg, body.str(), out);
      return res.found ? 0 : 2;
    }

    if (c_jmap->parsed()) {
      bool valid = false;
      const StructureConstants sc = detail::load_checked(cfg, true, err, valid);
      if (!valid) return 1;
      const Eigen::VectorXd u = detail::parse_csv_vector(u_text);
      if (u.size() != sc.d2())
        throw DomainError("jmap: --u needs " + std::to_string(sc.d2()) + " entries");
      const JOperator J = j_operator(sc, u);
      write_report_header(body, "jmap", cfg.spec_source, sc, cfg.seed, cfg.budget);
      for (int i = 0; i < sc.m(); ++i) {
        if (!csv) body << "row " << i + 1 << ": ";
        body << join_coords(J.mat.row(i).transpose()) << "\n";
      }
      detail::emit(cfg, body.str(), out);
      return 0;
    }

    if (c_dist->parsed()) {
      bool valid = false;
      const StructureConstants sc = detail::load_checked(cfg, true, err, valid);
      if (!valid) return 1;
      const GroupPoint p = detail::parse_point(sc, p_text);
      const GroupPoint q = detail::parse_point(sc, q_text);
      DistanceMethod method = DistanceMethod::Both;
      if (method_text == "shooting") method = DistanceMethod::Shooting;
      if (method_text == "control") method = DistanceMethod::Control;
      DistanceOptions opt;
      opt.shooting.seed = cfg.seed;
      opt.control.seed = cfg.seed;
      const DistanceEstimate est = distance(sc, p, q, method, opt);
      write_report_header(body, "dist", cfg.spec_source, sc, cfg.seed, cfg.budget);
      auto kv = [&](const std::string& k, const std::string& v) {
        body << k << (csv ? "," : ": ") << v << "\n";
      };
      if (csv) body << "key,value\n";
      kv("method", to_string(est.method));
      if (est.shooting_value) {
        kv("shooting-value", g17(*est.shooting_value));
        kv("shooting-residual", g17(est.best_residual));
        kv("starts-used", std::to_string(est.starts_used));
        kv("starts-converged", std::to_string(est.starts_converged));
        kv("shooting-covector", join_coords(est.best_shooting->lambda.coords()));
      }
      if (est.control_value) {
        kv("control-value", g17(*est.control_value));
        kv("control-feasibility", g17(est.control_feasibility));
      }
      if (est.shooting_value && est.control_value) kv("relative-gap", g17(est.relative_gap()));
      if (est.inconclusive) {
        kv("status", "inconclusive");
        kv("note", est.note);
      } else {
        kv("value", g17(est.value()));
      }
      detail::emit(cfg, body.str(), out);
      return est.inconclusive ? 2 : 0;
    }

    if (c_exp->parsed()) {
      bool valid = false;
      const StructureConstants sc = detail::load_checked(cfg, true, err, valid);
      if (!valid) return 1;
      const Covector lambda = detail::parse_covector(sc, lambda_text);
      if (!(t_value >= 0.0 && t_value <= 1.0)) throw DomainError("exp: --t must lie in [0, 1]");
      const GroupPoint g = exp_map(sc, lambda, t_value);
      write_report_header(body, "exp", cfg.spec_source, sc, cfg.seed, cfg.budget);
      if (csv) {
        body << "key,value\n";
        body << "endpoint," << join_coords(g.coords()) << "\n";
        body << "speed," << g17(lambda.xi0.norm()) << "\n";
      } else {
        body << "endpoint: " << join_coords(g.coords()) << "\n";
        body << "speed: " << g17(lambda.xi0.norm()) << "\n";
        body << "length: " << g17(t_value * lambda.xi0.norm()) << "\n";
      }
      detail::emit(cfg, body.str(), out);
      return 0;
    }

    if (c_mcp->parsed()) {
      bool valid = false;
      const StructureConstants sc = detail::load_checked(cfg, true, err, valid);
      if (!valid) return 1;
      std::vector<double> s_grid;
      for (int i = 1; i <= 9; ++i) s_grid.push_back(0.1 * i);
      const NceReport rep = nce_lower_bound(sc, mcp_samples, s_grid, cfg.seed);
      write_report_header(body, "mcp", cfg.spec_source, sc, cfg.seed, cfg.budget);
      if (csv) {
        body << "xi0;u0,s,exponent,minimizing\n";
        for (const auto& s : rep.samples)
          body << join_coords(s.lambda.coords()) << ";" << g17(s.s) << "," << g17(s.exponent)
               << "," << (s.minimizing ? 1 : 0) << "\n";
        body << "# best-exponent," << (rep.found ? g17(rep.best_exponent) : "none") << "\n";
      } else {
        body << "samples-requested: " << rep.samples_requested << "\n";
        body << "samples-kept: " << rep.samples_kept << "\n";
        body << "samples-discarded: " << rep.samples_discarded << "\n";
        if (rep.found) {
          body << "nce-lower-bound: " << g17(rep.best_exponent) << "\n";
          body << "witness-lambda: " << join_coords(rep.witness_lambda.coords()) << "\n";
          body << "witness-s: " << g17(rep.witness_s) << "\n";
        } else {
          body << "nce-lower-bound: none (all samples filtered out)\n";
        }
      }
      detail::emit(cfg, body.str(), out);
      return rep.found ? 0 : 2;
    }

    if (c_conv->parsed()) {
      const GroupFamily fam = gk_family();
      const StructureConstants sc_inf = fam.limit();
      const std::vector<long> ks = k_list.empty() ? default_k_list() : k_list;
      Rng rng(cfg.seed);
      std::vector<std::pair<GroupPoint, GroupPoint>> pairs;
      for (long i = 0; i < pair_count; ++i)
        pairs.emplace_back(
            GroupPoint::from_coords(sc_inf.m(), sc_inf.d2(), rng.uniform_vector(sc_inf.n(), -0.5, 0.5)),
            GroupPoint::from_coords(sc_inf.m(), sc_inf.d2(), rng.uniform_vector(sc_inf.n(), -0.5, 0.5)));
      DistanceOptions opt;
      opt.shooting.seed = cfg.seed;
      opt.control.seed = cfg.seed;
      const ConvergenceReport rep = convergence_report(fam, pairs, ks, opt);
      write_report_header(body, "family converge", "gk family", sc_inf, cfg.seed, cfg.budget);
      body << "k,pair,d_k,d_inf,gap,ok\n";
      for (const auto& cell : rep.cells)
        body << cell.k << "," << cell.pair_id << "," << g17(cell.d_k) << "," << g17(cell.d_inf)
             << "," << g17(cell.gap) << "," << (cell.solver_ok ? 1 : 0) << "\n";
      for (std::size_t i = 0; i < ks.size(); ++i)
        body << "# max-gap k=" << ks[i] << ": " << g17(rep.max_gap_per_k[i]) << "\n";
      detail::emit(cfg, body.str(), out);
      return rep.all_solved ? 0 : 2;
    }

    if (c_semi->parsed()) {
      const GroupFamily fam = gk_family();
      const std::vector<long> ks = k_list.empty() ? default_k_list() : k_list;
      const SemicontinuityReport rep = semicontinuity_experiment(fam, cfg.budget, cfg.seed, ks);
      write_report_header(body, "family semicontinuity", "gk family", fam.limit(), cfg.seed,
                          cfg.budget);
      if (csv) {
        body << "member,metivier,n0\n";
        for (const auto& row : rep.rows)
          body << row.label << "," << to_string(row.verdict.status) << ","
               << (row.n0.found ? std::to_string(row.n0.best_value) : "none") << "\n";
        body << "# pattern-ok," << (rep.pattern_ok ? "yes" : "no") << "\n";
      } else {
        body << rep.text;
      }
      detail::emit(cfg, body.str(), out);
      return rep.pattern_ok ? 0 : 2;
    }
  } catch (const StructuralError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << "no command dispatched\n";
  return 3;
}

}  // namespace cli
}  // namespace carnot

#endif
