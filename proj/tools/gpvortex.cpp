// SPDX-License-Identifier: Apache-2.0
//
// gpvortex — rotating Gross-Pitaevskii ground states in anisotropic harmonic
// traps: the Townes profile and its critical mass, the linearized correctors
// of the near-critical expansion, expansion constants and identities, ground
// state minimization, expansion verification, and parameter sweeps.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpvortex/gpvortex.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace gpv;

namespace {

constexpr int kFormatVersion = 1;

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot open report file '" + path + "'");
  out << j.dump(2) << "\n";
}

json base_report(const json& config) {
  json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config;
  return j;
}

json diag_json(const SolveDiagnostics& d) {
  return json{{"residual", d.residual},
              {"solvability_defect", d.solvability_defect},
              {"iterations", d.iterations},
              {"gauge_coeffs", {d.gauge_coeffs[0], d.gauge_coeffs[1]}}};
}

// a KwongProfile reconstructed from a stored field (no radial data)
KwongProfile kwong_from_field(RealField w) {
  KwongProfile kp;
  kp.w = std::move(w);
  kp.a_star_2d = integrate(kp.w * kp.w);
  kp.a_star_radial = 0.0;
  RealField res = laplacian(kp.w);
  for (std::size_t k = 0; k < kp.w.size(); ++k) {
    const double v = kp.w.values[k];
    res.values[k] += -v + v * v * v;
  }
  kp.pde_residual = sup_norm(res) / sup_norm(kp.w);
  return kp;
}

struct PsiDir {
  KwongProfile kp;
  PsiSet ps;
};

PsiDir load_psi_dir(const std::string& dir) {
  PsiDir out;
  out.kp = kwong_from_field(read_real_field(fs::path(dir) / "w.gpf"));
  std::ifstream meta(fs::path(dir) / "psi.json");
  if (!meta) throw FormatError("psi dir '" + dir + "' missing psi.json");
  json j = json::parse(meta);
  out.ps.Lambda = j.at("lambda").get<double>();
  out.ps.lambda0 = j.at("lambda0").get<double>();
  auto rd = [&](const char* name) { return read_real_field(fs::path(dir) / name); };
  out.ps.psi1 = rd("psi1.gpf");
  out.ps.psi2 = rd("psi2.gpf");
  out.ps.psi_aniso = rd("psi_aniso.gpf");
  out.ps.psiI = rd("psiI.gpf");
  out.ps.psi3_base = rd("psi3_base.gpf");
  out.ps.psi3_rot = rd("psi3_rot.gpf");
  out.ps.psi4 = rd("psi4.gpf");
  out.ps.psi5 = rd("psi5.gpf");
  return out;
}

Frame parse_frame(const std::string& s) {
  if (s == "physical") return Frame::Physical;
  if (s == "rescaled") return Frame::Rescaled;
  throw ValidationError("frame must be 'physical' or 'rescaled', got '" + s + "'");
}

InitKind parse_init(const std::string& s) {
  if (s == "gaussian") return InitKind::Gaussian;
  if (s == "kwong") return InitKind::KwongSeeded;
  throw ValidationError("init must be 'gaussian' or 'kwong', got '" + s + "'");
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(std::stod(s.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  if (out.empty()) throw ValidationError("empty a-list");
  return out;
}

json minimize_report_json(const MinimizerResult& r, const json& config,
                          const std::string& field_file) {
  json j = base_report(config);
  j["field_file"] = field_file;
  j["energy"] = r.energy;
  j["energy_frame"] = r.energy_frame;
  j["mu"] = r.mu;
  j["mu_hat"] = r.mu_hat;
  j["eps"] = r.eps;
  j["mass"] = r.mass;
  j["steps"] = r.steps;
  j["newton_steps"] = r.newton_steps;
  j["final_residual"] = r.final_residual;
  j["width_cells"] = r.width_cells;
  j["rms_width"] = r.rms_width;
  j["energy_monotone"] = r.energy_monotone;
  j["max_energy_rise"] = r.max_energy_rise;
  return j;
}

json expansion_report_json(const ExpansionReport& rep) {
  json j;
  j["eps"] = rep.eps_a;
  j["beta"] = rep.beta_a;
  j["beta_over_eps4"] = rep.beta_ratio;
  j["c_star_ref"] = rep.c_star_ref;
  j["xa_norm"] = rep.xa_norm;
  j["xa_over_eps5"] = rep.xa_over_eps5;
  j["R_residual"] = rep.R_residual;
  j["I_residual"] = rep.I_residual;
  j["second_order_residual"] = rep.second_order_residual;
  j["c_fit"] = rep.c_fit;
  j["c_fit_over_eps4"] = rep.c_fit_over_eps4;
  j["minus_two_c_fit_over_eps4"] = rep.minus_two_c_fit_over_eps4;
  j["orthogonality_defect"] = rep.orth_defect;
  j["vortex_free_radius"] = rep.vortex_free_radius;
  j["decay_C1"] = rep.decay_C1;
  j["decay_bounded"] = rep.decay_bounded;
  json vort = json::array();
  for (const auto& v : rep.vortices)
    vort.push_back(json{{"x", v.x}, {"y", v.y}, {"winding", v.winding}});
  j["vortices"] = vort;
  return j;
}

std::string csv_header() {
  return "a,eps,mu,beta,beta_over_eps4,c_star_ref,xa_norm,R_resid1,R_resid2,I_resid,"
         "vortex_free_radius,decay_C1";
}

std::string csv_row(const SweepRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                r.a, r.eps, r.mu, r.beta, r.beta_over_eps4, r.c_star_ref, r.xa_norm,
                r.R_resid1, r.R_resid2, r.I_resid, r.vortex_free_radius, r.decay_C1);
  return buf;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotating Gross-Pitaevskii ground states and their near-critical expansion"};
  app.require_subcommand(1);

  // ---- kwong ----------------------------------------------------------
  int n = 256;
  double L = 16.0, tol = 1e-12;
  std::string out_field = "w.gpf", report_path = "kwong.json";
  auto* kwong_cmd = app.add_subcommand("kwong", "Townes profile, critical mass, identities");
  kwong_cmd->add_option("--n", n, "points per axis");
  kwong_cmd->add_option("--L", L, "half-width of the box");
  kwong_cmd->add_option("--tol", tol, "radial shooting tolerance");
  kwong_cmd->add_option("--out", out_field, "output field file");
  kwong_cmd->add_option("--report", report_path, "output JSON report");

  // ---- psi ------------------------------------------------------------
  std::string which = "all", out_dir = ".";
  double lambda_opt = 0.8, solver_tol = 1e-11;
  auto* psi_cmd = app.add_subcommand("psi", "auxiliary expansion fields");
  psi_cmd->add_option("--which", which, "1|2|aniso|I|3|4|5|all");
  psi_cmd->add_option("--lambda", lambda_opt, "trap anisotropy in (0,1]");
  psi_cmd->add_option("--n", n, "points per axis");
  psi_cmd->add_option("--L", L, "half-width of the box");
  psi_cmd->add_option("--tol", solver_tol, "Krylov tolerance");
  psi_cmd->add_option("--out-dir", out_dir, "directory for field files + psi.json");

  // ---- constants ------------------------------------------------------
  auto* const_cmd = app.add_subcommand("constants", "expansion constants and identities");
  const_cmd->add_option("--lambda", lambda_opt, "trap anisotropy in (0,1]");
  const_cmd->add_option("--n", n, "points per axis");
  const_cmd->add_option("--L", L, "half-width of the box");
  const_cmd->add_option("--tol", solver_tol, "Krylov tolerance");
  const_cmd->add_option("--report", report_path, "output JSON report");

  // ---- minimize -------------------------------------------------------
  double a_opt = 1.0, omega_opt = 0.0, dt = 1e-3, tol_res = 1e-9;
  std::int64_t max_steps = 2'000'000;
  std::string frame_s = "rescaled", init_s = "kwong", min_report = "min.json";
  bool no_polish = false;
  auto* min_cmd = app.add_subcommand("minimize", "ground-state minimization");
  min_cmd->add_option("--a", a_opt, "interaction strength (a < a*)")->required();
  min_cmd->add_option("--lambda", lambda_opt, "trap anisotropy in (0,1]");
  min_cmd->add_option("--omega", omega_opt, "rotation speed (Omega < 2 min(1, Lambda))");
  min_cmd->add_option("--frame", frame_s, "physical|rescaled");
  min_cmd->add_option("--init", init_s, "gaussian|kwong");
  min_cmd->add_option("--n", n, "points per axis");
  min_cmd->add_option("--L", L, "half-width of the box");
  min_cmd->add_option("--dt", dt, "flow step");
  min_cmd->add_option("--tol", tol_res, "EL residual tolerance");
  min_cmd->add_option("--max-steps", max_steps, "flow step budget");
  min_cmd->add_flag("--no-polish", no_polish, "disable the Newton corrector");
  min_cmd->add_option("--out", out_field, "output field file");
  min_cmd->add_option("--report", min_report, "output JSON report");

  // ---- verify ---------------------------------------------------------
  std::string psi_dir = ".", min_report_in = "min.json", verify_out = "report.json";
  auto* ver_cmd = app.add_subcommand("verify", "expansion verification of a minimizer");
  ver_cmd->add_option("--a", a_opt, "interaction strength used by the minimizer");
  ver_cmd->add_option("--lambda", lambda_opt, "trap anisotropy in (0,1]");
  ver_cmd->add_option("--omega", omega_opt, "rotation speed");
  ver_cmd->add_option("--psi-dir", psi_dir, "directory produced by 'psi'")->required();
  ver_cmd->add_option("--min-report", min_report_in, "report produced by 'minimize'")->required();
  ver_cmd->add_option("--out", verify_out, "output JSON report");

  // ---- sweep ----------------------------------------------------------
  std::string a_list_s, csv_path = "sweep.csv";
  int workers = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "minimize+verify across interaction strengths");
  sweep_cmd->add_option("--a-list", a_list_s, "comma-separated interaction strengths")->required();
  sweep_cmd->add_option("--lambda", lambda_opt, "trap anisotropy in (0,1]");
  sweep_cmd->add_option("--omega", omega_opt, "rotation speed");
  sweep_cmd->add_option("--n", n, "points per axis");
  sweep_cmd->add_option("--L", L, "half-width of the box");
  sweep_cmd->add_option("--dt", dt, "flow step");
  sweep_cmd->add_option("--tol", tol_res, "EL residual tolerance");
  sweep_cmd->add_option("--workers", workers, "worker threads (1 = sequential + continuation)");
  sweep_cmd->add_option("--csv", csv_path, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (*kwong_cmd) {
      if (!(tol > 1e-14 && tol < 1e-6))
        throw ValidationError("kwong: --tol must lie in (1e-14, 1e-6)");
      GridSpec grid(n, n, L, L);
      auto prof = solve_kwong_radial(tol, std::max(25.0, std::hypot(L, L) + 2.0));
      auto kp = rasterize(prof, grid, true);
      auto id = verify_identities(kp);
      write_field(kp.w, out_field);
      json cfg{{"n", n}, {"L", L}, {"tol", tol}, {"out", out_field}};
      json j = base_report(cfg);
      j["w0"] = prof.w0;
      j["a_star_radial"] = kp.a_star_radial;
      j["a_star_2d"] = kp.a_star_2d;
      j["pde_residual"] = kp.pde_residual;
      j["polish_iterations"] = kp.polish_iterations;
      j["identities"] = json{{"grad_sq", id.grad_sq},
                             {"mass", id.mass},
                             {"quartic_half", id.quartic_half},
                             {"gn_ratio", id.gn_ratio}};
      write_json(j, report_path);
      std::cout << "w0 = " << prof.w0 << ", a* = " << kp.a_star_2d << "\n";
    } else if (*psi_cmd) {
      if (!(solver_tol > 0)) throw ValidationError("psi: --tol must be positive");
      GridSpec grid(n, n, L, L);
      auto kp = compute_kwong(grid, 1e-12, true);
      auto ps = build_psi_set(lambda_opt, kp, solver_tol);
      fs::create_directories(out_dir);
      auto put = [&](const char* name, const RealField& f) {
        write_field(f, fs::path(out_dir) / name);
      };
      put("w.gpf", kp.w);
      const bool all = which == "all";
      if (all || which == "1") put("psi1.gpf", ps.psi1);
      if (all || which == "2") put("psi2.gpf", ps.psi2);
      if (all || which == "aniso") put("psi_aniso.gpf", ps.psi_aniso);
      if (all || which == "I") put("psiI.gpf", ps.psiI);
      if (all || which == "3") {
        put("psi3_base.gpf", ps.psi3_base);
        put("psi3_rot.gpf", ps.psi3_rot);
      }
      if (all || which == "4") put("psi4.gpf", ps.psi4);
      if (all || which == "5") put("psi5.gpf", ps.psi5);
      if (all) {
        put("psi3_base.gpf", ps.psi3_base);
        put("psi3_rot.gpf", ps.psi3_rot);
      }
      json cfg{{"which", which}, {"lambda", lambda_opt}, {"n", n}, {"L", L}, {"tol", solver_tol}};
      json j = base_report(cfg);
      j["lambda"] = lambda_opt;
      j["lambda0"] = ps.lambda0;
      json diags;
      for (const auto& [name, d] : ps.diagnostics) diags[name] = diag_json(d);
      j["solves"] = diags;
      write_json(j, fs::path(out_dir) / "psi.json");
      std::cout << "psi set written to " << out_dir << "\n";
    } else if (*const_cmd) {
      if (!(solver_tol > 0)) throw ValidationError("constants: --tol must be positive");
      GridSpec grid(n, n, L, L);
      auto kp = compute_kwong(grid, 1e-12, true);
      auto ps = build_psi_set(lambda_opt, kp, solver_tol);
      auto rep = coefficient_report(lambda_opt, kp, ps);
      json cfg{{"lambda", lambda_opt}, {"n", n}, {"L", L}, {"tol", solver_tol}};
      json j = base_report(cfg);
      j["lambda0"] = rep.lambda0;
      j["c_star"] = rep.c_star;
      j["c_star_printed"] = rep.c_star_printed;
      j["lemma32"] = json{{"int_w_psi1", rep.int_w_psi1},
                          {"int_w_psi2", rep.int_w_psi2},
                          {"T1", rep.T1},
                          {"T2", rep.T2},
                          {"T2_ratio", rep.T2_ratio}};
      j["claim_5_8"] = json{{"II1", rep.II1}, {"II2", rep.II2}};
      j["claim_5_2_beta"] = json{{"lhs", rep.claim_lhs},
                                 {"rhs_printed", rep.claim_rhs_printed},
                                 {"rhs_corrected", rep.claim_rhs_corrected},
                                 {"grad_psi1_sq", rep.grad_psi1_sq}};
      j["pohozaev_defect"] = rep.pohozaev_defect;
      write_json(j, report_path);
      std::cout << "lambda0 = " << rep.lambda0 << ", C* = " << rep.c_star << "\n";
    } else if (*min_cmd) {
      GridSpec grid(n, n, L, L);
      auto kp = compute_kwong(grid, 1e-12, true);
      GPParams p;
      p.a = a_opt;
      p.Lambda = lambda_opt;
      p.Omega = omega_opt;
      FlowConfig cfg;
      cfg.dt = dt;
      cfg.tol_residual = tol_res;
      cfg.max_steps = max_steps;
      cfg.frame = parse_frame(frame_s);
      cfg.init = parse_init(init_s);
      cfg.polish = !no_polish;
      auto r = minimize(p, grid, cfg, kp);
      write_field(r.field, out_field);
      json jcfg{{"a", a_opt},     {"lambda", lambda_opt}, {"omega", omega_opt},
                {"frame", frame_s}, {"init", init_s},      {"n", n},
                {"L", L},         {"dt", dt},            {"tol", tol_res},
                {"max_steps", max_steps}, {"polish", !no_polish}};
      write_json(minimize_report_json(r, jcfg, out_field), min_report);
      std::cout << "e_F = " << r.energy << ", mu = " << r.mu
                << ", residual = " << r.final_residual << "\n";
    } else if (*ver_cmd) {
      auto pd = load_psi_dir(psi_dir);
      std::ifstream min_in(min_report_in);
      if (!min_in) throw FormatError("cannot open minimize report '" + min_report_in + "'");
      json mj = json::parse(min_in);
      const std::string field_file = mj.at("field_file").get<std::string>();
      fs::path field_path = field_file;
      if (field_path.is_relative())
        field_path = fs::path(min_report_in).parent_path() / field_path;
      ComplexField u = read_complex_field(field_path);
      GPParams p;
      p.a = mj.at("config").at("a").get<double>();
      p.Lambda = mj.at("config").at("lambda").get<double>();
      p.Omega = mj.at("config").at("omega").get<double>();
      if (ver_cmd->count("--a") && std::abs(a_opt - p.a) > 1e-12)
        throw ValidationError("verify: --a disagrees with the minimize report");
      const Frame frame = parse_frame(mj.at("config").at("frame").get<std::string>());
      const double mu_hat = mj.at("mu_hat").get<double>();
      const double c_ref = c_star(p.Lambda, pd.kp, pd.ps);
      auto fit = fit_gauge(u, p, pd.kp, frame);
      auto rep = decompose_and_compare(fit, pd.ps, pd.kp, mu_hat, p.Omega, c_ref);
      json cfg{{"a", p.a},
               {"lambda", p.Lambda},
               {"omega", p.Omega},
               {"psi_dir", psi_dir},
               {"min_report", min_report_in}};
      json j = base_report(cfg);
      j.update(expansion_report_json(rep));
      write_json(j, verify_out);
      std::cout << "beta/eps^4 = " << rep.beta_ratio << " vs C* = " << rep.c_star_ref
                << ", vortex-free radius = " << rep.vortex_free_radius << "\n";
    } else if (*sweep_cmd) {
      GridSpec grid(n, n, L, L);
      auto a_list = parse_list(a_list_s);
      auto kp = compute_kwong(grid, 1e-12, true);
      auto ps = build_psi_set(lambda_opt, kp);
      GPParams base;
      base.Lambda = lambda_opt;
      base.Omega = omega_opt;
      FlowConfig cfg;
      cfg.dt = dt;
      cfg.tol_residual = tol_res;
      cfg.frame = Frame::Rescaled;
      std::vector<SweepRow> rows;
      if (workers <= 1) {
        rows = run_sweep(a_list, base, grid, cfg, kp, ps, true);
      } else {
        rows.resize(a_list.size());
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int t = 0; t < workers; ++t)
          pool.emplace_back([&] {
            for (std::size_t k = next.fetch_add(1); k < a_list.size(); k = next.fetch_add(1))
              rows[k] = run_sweep({a_list[k]}, base, grid, cfg, kp, ps, false)[0];
          });
        for (auto& th : pool) th.join();
      }
      std::ofstream csv(csv_path, std::ios::trunc);
      csv << csv_header() << "\n";
      for (const auto& r : rows) csv << csv_row(r) << "\n";
      std::cout << "sweep of " << rows.size() << " points written to " << csv_path << "\n";
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const CokernelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
