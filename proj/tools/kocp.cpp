// Command-line front end: parse matrix/problem/polynomial files, dispatch
// to the library and emit human-readable or JSON reports with stable exit
// codes (0 ok, 1 infeasible/non-member, 2 numerical failure, 3 bad input).

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "kocp/kocp.hpp"

namespace {

using kocp::io::json;

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitInput = 3;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw kocp::InputError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw kocp::InputError(path + ": " + e.what());
  }
}

struct Reporter {
  bool as_json = false;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  // JSON reports omit wall time so identical inputs give identical bytes
  void emit(json report) const {
    if (as_json) {
      std::cout << report.dump(2) << "\n";
      return;
    }
    for (const auto& [key, value] : report.items()) {
      if (value.is_structured())
        std::cout << key << ": " << value.dump() << "\n";
      else
        std::cout << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
                  << "\n";
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    std::cout << "wall_time_ms: " << ms << "\n";
  }
};

int status_exit(kocp::SolveStatus s) {
  switch (s) {
    case kocp::SolveStatus::Optimal: return kExitOk;
    case kocp::SolveStatus::Infeasible:
    case kocp::SolveStatus::Unbounded: return kExitNegative;
    case kocp::SolveStatus::MaxIter:
    case kocp::SolveStatus::NumericalFailure: return kExitNumerical;
  }
  return kExitNumerical;
}

kocp::ConeSpec cone_from_flags(const std::string& family, int d, int k, const std::string& jspec,
                               const std::string& norm, bool force) {
  json j{{"family", family}, {"d", d}, {"k", k}};
  if (jspec == "full" || jspec == "soc") j["J"] = jspec;
  else j["J"] = load_json(jspec);
  if (!norm.empty()) j["norm"] = norm;
  return kocp::io::cone_from_json(j, force);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-th order cone programming toolkit"};
  app.require_subcommand(1);

  bool as_json = false;
  std::uint64_t seed = 0;
  double tol_override = -1.0;
  bool force_size = false;
  app.add_flag("--json", as_json, "emit a JSON report");
  app.add_option("--seed", seed, "seed for randomized checks");
  app.add_option("--tol", tol_override, "membership / solver tolerance override");
  app.add_flag("--force-size", force_size, "override the |J| size cap");

  // check
  auto* check = app.add_subcommand("check", "cone membership of a matrix or norm-cone point");
  std::string check_matrix, check_point, check_cone = "psd", check_J = "full", check_norm;
  int check_k = 2;
  bool check_dual = false;
  check->add_option("--matrix", check_matrix, "symmetric matrix JSON file");
  check->add_option("--point", check_point, "norm-cone point JSON file");
  check->add_option("--cone", check_cone, "psd | soc | cp | cpp | norm");
  check->add_option("--k", check_k, "hierarchy order");
  check->add_option("--J", check_J, "full | soc | tuple-list JSON file");
  check->add_option("--norm", check_norm, "norm name for --cone norm");
  check->add_flag("--dual", check_dual, "test the dual cone");

  // decompose
  auto* decompose = app.add_subcommand("decompose", "factor-width decomposition of a matrix");
  std::string dec_matrix;
  int dec_k = 2;
  decompose->add_option("--matrix", dec_matrix, "symmetric matrix JSON file")->required();
  decompose->add_option("--k", dec_k, "block order");

  // solve
  auto* solvecmd = app.add_subcommand("solve", "solve a k-th order cone program");
  std::string solve_file;
  int solve_maxiter = 200;
  solvecmd->add_option("problem", solve_file, "problem JSON file")->required();
  solvecmd->add_option("--max-iter", solve_maxiter, "outer iteration cap");

  // scan
  auto* scan = app.add_subcommand("scan", "solve across hierarchy orders");
  std::string scan_file;
  int scan_kmin = 1, scan_kmax = 0;
  scan->add_option("problem", scan_file, "problem JSON file")->required();
  scan->add_option("--kmin", scan_kmin, "lowest order");
  scan->add_option("--kmax", scan_kmax, "highest order (default d)");

  // certify-poly
  auto* certify = app.add_subcommand("certify-poly", "kDDSOS certification of a polynomial");
  std::string poly_file;
  int poly_k = 2;
  certify->add_option("polynomial", poly_file, "polynomial JSON file")->required();
  certify->add_option("--k", poly_k, "hierarchy order");

  // verify-cert
  auto* verify = app.add_subcommand("verify-cert", "check a Gram certificate by expansion");
  std::string vpoly_file, vcert_file;
  verify->add_option("polynomial", vpoly_file, "polynomial JSON file")->required();
  verify->add_option("certificate", vcert_file, "certificate JSON file")->required();

  // verify-embedding
  auto* embed = app.add_subcommand("verify-embedding", "randomized truncation/lift audit");
  std::string emb_family = "psd";
  int emb_d = 5, emb_k = 3, emb_samples = 100;
  embed->add_option("--family", emb_family, "psd | sdd | dd | soc | psd-order-2");
  embed->add_option("--d", emb_d, "ambient dimension");
  embed->add_option("--k", emb_k, "truncation order");
  embed->add_option("--samples", emb_samples, "sample count");

  // cast-socp
  auto* cast = app.add_subcommand("cast-socp", "cast an SOCP into an SDD (order-2) program");
  std::string socp_file;
  bool cast_solve = false;
  cast->add_option("socp", socp_file, "SOCP JSON file")->required();
  cast->add_flag("--solve", cast_solve, "also solve the cast program");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitInput : kExitOk;
  }

  Reporter rep;
  rep.as_json = as_json;
  const double member_tol = tol_override > 0 ? tol_override : kocp::tol::psd;
  kocp::SolveOptions sopts;
  if (tol_override > 0) sopts.tol = tol_override;
  sopts.force_size = force_size;
  sopts.max_iter = solve_maxiter;

  try {
    if (*check) {
      bool member = false;
      double margin = 0;
      json report{{"command", "check"}, {"seed", seed}};
      if (check_cone == "norm" || !check_point.empty()) {
        const auto pt = kocp::io::normcone_point_from_json(load_json(check_point));
        const auto n = kocp::NormDescriptor::parse(check_norm);
        const auto r = kocp::normcone_k_membership(
            pt, n, check_k,
            check_dual ? kocp::MembershipSide::Dual : kocp::MembershipSide::Primal);
        member = r.member;
        margin = r.margin;
        report["norm"] = n.to_string();
      } else {
        const auto a = kocp::io::matrix_from_json(load_json(check_matrix));
        if (check_cone == "cp" || check_cone == "cpp") {
          if (check_dual) throw kocp::InputError("cp/cpp dual membership is unsupported");
          if (check_cone == "cp") {
            member = kocp::cp_membership(a).member;
            margin = member ? 0.0 : -1.0;  // no natural scalar margin for the split
          } else {
            member = kocp::cpp_membership(a);
            double min_entry = std::numeric_limits<double>::infinity();
            for (double v : a.upper()) min_entry = std::min(min_entry, v);
            margin = std::min(kocp::psd_margin(a), min_entry);
          }
        } else {
          const auto spec = cone_from_flags(check_cone, a.dim(), check_k, check_J,
                                            check_norm, force_size);
          if (check_dual) {
            const auto r = kocp::dual_membership(a, spec);
            margin = r.margin;
          } else {
            const auto r = kocp::primal_margin(a, spec, sopts.ipm());
            margin = r.margin;
            if (r.decomposition) report["decomposition"] = kocp::io::to_json(*r.decomposition);
          }
          member = margin >= -member_tol * kocp::psd_scale(a);
        }
      }
      report["verdict"] = member ? "member" : "non-member";
      report["margin"] = margin;
      rep.emit(report);
      return member ? kExitOk : kExitNegative;
    }

    if (*decompose) {
      const auto a = kocp::io::matrix_from_json(load_json(dec_matrix));
      json report{{"command", "decompose"}, {"seed", seed}, {"k", dec_k}};
      if (dec_k == 2) {
        const auto sdd = kocp::is_sdd(a);
        if (!sdd.sdd) {
          report["verdict"] = "non-member";
          report["margin"] = sdd.margin;
          rep.emit(report);
          return kExitNegative;
        }
        const auto dec = kocp::factor_width2_decompose(a);
        const auto chk =
            kocp::verify_decomposition(a, dec, kocp::ConeSpec::psd(a.dim(), std::min(2, a.dim())));
        report["verdict"] = "member";
        report["margin"] = sdd.margin;
        report["recon_err"] = chk.recon_err;
        report["min_block_margin"] = chk.min_block_margin;
        report["decomposition"] = kocp::io::to_json(dec);
        rep.emit(report);
        return kExitOk;
      }
      const auto spec = kocp::ConeSpec::psd(a.dim(), dec_k, force_size);
      const auto r = kocp::primal_margin(a, spec, sopts.ipm());
      report["verdict"] = r.member ? "member" : "non-member";
      report["margin"] = r.margin;
      if (r.member && r.decomposition) {
        const auto chk = kocp::verify_decomposition(a, *r.decomposition, spec);
        report["recon_err"] = chk.recon_err;
        report["min_block_margin"] = chk.min_block_margin;
        report["decomposition"] = kocp::io::to_json(*r.decomposition);
      }
      rep.emit(report);
      return r.member ? kExitOk : kExitNegative;
    }

    if (*solvecmd) {
      const auto pv = kocp::io::problem_from_json(load_json(solve_file), force_size);
      kocp::Solution sol;
      json report{{"command", "solve"}, {"seed", seed}};
      if (std::holds_alternative<kocp::StandardProblem>(pv)) {
        const auto& prob = std::get<kocp::StandardProblem>(pv);
        sol = kocp::solve(prob, sopts);
        if (sol.X && sol.Z) report["kkt"] = kocp::io::to_json(kocp::kkt_residuals(prob, sol));
      } else {
        sol = kocp::solve(std::get<kocp::InequalityProblem>(pv), sopts);
      }
      report["verdict"] = kocp::to_string(sol.status);
      report["solution"] = kocp::io::to_json(sol);
      rep.emit(report);
      return status_exit(sol.status);
    }

    if (*scan) {
      const auto pv = kocp::io::problem_from_json(load_json(scan_file), force_size);
      if (!std::holds_alternative<kocp::StandardProblem>(pv))
        throw kocp::InputError("scan expects a standard-form problem");
      const auto& prob = std::get<kocp::StandardProblem>(pv);
      const int kmax = scan_kmax > 0 ? scan_kmax : prob.cone.d;
      const auto r = kocp::hierarchy_scan(prob, scan_kmin, kmax, sopts);
      json entries = json::array();
      bool all_ok = true;
      for (const auto& e : r.entries) {
        entries.push_back(json{{"k", e.k},
                               {"status", kocp::to_string(e.status)},
                               {"objective", e.objective}});
        all_ok = all_ok && e.status == kocp::SolveStatus::Optimal;
      }
      json report{{"command", "scan"},
                  {"seed", seed},
                  {"entries", std::move(entries)},
                  {"monotone", r.monotone},
                  {"chain_warning", r.chain_warning},
                  {"verdict", all_ok ? "optimal" : "partial"}};
      rep.emit(report);
      return all_ok ? kExitOk : kExitNumerical;
    }

    if (*certify) {
      const auto p = kocp::io::polynomial_from_json(load_json(poly_file));
      const auto r = kocp::certify_kddsos(p, poly_k, sopts);
      json report{{"command", "certify-poly"},
                  {"seed", seed},
                  {"k", poly_k},
                  {"verdict", r.feasible ? "feasible" : "infeasible"}};
      if (r.certificate) {
        report["certificate"] = kocp::io::to_json(*r.certificate);
        const auto chk = kocp::verify_certificate(p, *r.certificate);
        report["certificate_valid"] = chk.valid;
        report["max_coef_err"] = chk.max_coef_err;
      }
      rep.emit(report);
      return r.feasible ? kExitOk : kExitNegative;
    }

    if (*verify) {
      const auto p = kocp::io::polynomial_from_json(load_json(vpoly_file));
      const auto cert = kocp::io::certificate_from_json(load_json(vcert_file));
      const auto chk = kocp::verify_certificate(p, cert);
      json report{{"command", "verify-cert"},
                  {"seed", seed},
                  {"verdict", chk.valid ? "valid" : "invalid"},
                  {"max_coef_err", chk.max_coef_err}};
      rep.emit(report);
      return chk.valid ? kExitOk : kExitNegative;
    }

    if (*embed) {
      kocp::EmbedFamily fam;
      if (emb_family == "psd") fam = kocp::EmbedFamily::Psd;
      else if (emb_family == "sdd") fam = kocp::EmbedFamily::Sdd;
      else if (emb_family == "dd") fam = kocp::EmbedFamily::Dd;
      else if (emb_family == "soc") fam = kocp::EmbedFamily::Soc;
      else if (emb_family == "psd-order-2") fam = kocp::EmbedFamily::PsdOrder2;
      else throw kocp::InputError("unknown embedding family: " + emb_family);
      const auto r = kocp::verify_embedding(fam, emb_d, emb_k, emb_samples, seed);
      json report{{"command", "verify-embedding"},
                  {"family", r.family},
                  {"d", r.d},
                  {"k", r.k},
                  {"samples", r.samples},
                  {"seed", r.seed},
                  {"violations", r.violations},
                  {"worst_margin", r.worst_margin},
                  {"verdict", r.violations == 0 ? "clean" : "violations"}};
      rep.emit(report);
      return r.violations == 0 ? kExitOk : kExitNegative;
    }

    if (*cast) {
      const auto socp = kocp::io::socp_from_json(load_json(socp_file));
      const auto ineq = kocp::socp_to_sdd(socp, force_size);
      json report{{"command", "cast-socp"},
                  {"seed", seed},
                  {"verdict", "ok"},
                  {"problem", kocp::io::to_json(ineq)}};
      if (cast_solve) {
        const auto sol = kocp::solve(ineq, sopts);
        report["verdict"] = kocp::to_string(sol.status);
        report["solution"] = kocp::io::to_json(sol);
        rep.emit(report);
        return status_exit(sol.status);
      }
      rep.emit(report);
      return kExitOk;
    }
  } catch (const kocp::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const kocp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const json::exception& e) {
    std::cerr << "bad input: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
