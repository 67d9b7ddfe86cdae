// relaybf command-line driver: solve, reproduce, oracle, trace-export.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "relaybf/relaybf.hpp"
#include "relaybf/scenario.hpp"

namespace fs = std::filesystem;
using relaybf::json;

namespace {

constexpr int kOk = 0;
constexpr int kReproduceMismatch = 1;
constexpr int kNoConvergence = 2;
constexpr int kInputError = 3;

struct Flags {
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
  std::optional<int> p;
  bool trace = false;
  std::string out;
};

// Write to a sibling temp file, then rename, so readers never see a partial file.
void write_atomic(const fs::path &path, const std::string &body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw relaybf::InputError("cannot write " + tmp.string());
    f << body;
    if (!f) throw relaybf::InputError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void apply_overrides(relaybf::Scenario &s, const Flags &f) {
  if (f.tol) s.solver.tol = *f.tol;
  if (f.seed) s.seed = *f.seed;
  if (f.samples) s.solver.samples = *f.samples;
  if (f.p) s.solver.p = *f.p;
}

fs::path out_dir(const Flags &f) { return f.out.empty() ? fs::path(".") : fs::path(f.out); }

int cmd_solve(const std::string &path, const Flags &f) {
  relaybf::Scenario s = relaybf::parse_scenario(path);
  apply_overrides(s, f);
  for (const auto &w : s.warnings) std::cerr << "warning: " << w << "\n";
  const std::string stem = fs::path(path).stem().string();
  const fs::path trace_path = out_dir(f) / (stem + ".trace.csv");
  relaybf::RunResult r;
  try {
    r = relaybf::run(s);
  } catch (const relaybf::ConvergenceError &e) {
    std::cerr << "error: " << e.what() << "\n";
    if (auto t = relaybf::partial_trace(e); t && f.trace) {
      write_atomic(trace_path, t->to_csv());
      std::cerr << "partial trace: " << trace_path.string() << "\n";
    }
    return kNoConvergence;
  }
  r.report["scenario"] = relaybf::serialize(s);
  r.report["trace_file"] = nullptr;
  if (f.trace) {
    if (r.trace) {
      write_atomic(trace_path, r.trace->to_csv());
      r.report["trace_file"] = trace_path.string();
      r.report["trace"] = relaybf::trace_json(*r.trace);
    } else {
      r.report["notes"].push_back("solver " + r.report["solver"]["solver"].get<std::string>() + " keeps no iteration trace");
    }
  }
  const std::string body = r.report.dump(2) + "\n";
  if (!f.out.empty()) write_atomic(out_dir(f) / (stem + ".report.json"), body);
  std::cout << body;
  return kOk;
}

json check_json(const relaybf::Check &c) {
  return json{{"quantity", c.quantity}, {"expected", c.expected}, {"actual", c.actual}, {"tol", c.tol},
              {"relative", c.relative}, {"pass", c.pass}, {"note", c.note}};
}

int cmd_reproduce(const std::string &which, const Flags &f) {
  relaybf::ReproduceOptions o;
  if (f.samples) o.grp_samples = *f.samples;
  if (f.seed) o.seed = *f.seed;
  if (f.p) o.p = *f.p;
  const auto checks = relaybf::reproduce(which, o);

  std::printf("%-9s %-36s %12s %12s %10s  %s\n", "case", "quantity", "expected", "actual", "tol", "result");
  bool all_pass = true;
  for (const auto &c : checks) {
    std::printf("%-9s %-36s %12.6g %12.6g %9.3g%s  %s%s%s\n", c.case_id.c_str(), c.quantity.c_str(), c.expected,
                c.actual, c.tol, c.relative ? "r" : " ", c.pass ? "PASS" : "FAIL", c.note.empty() ? "" : "  ",
                c.note.c_str());
    all_pass = all_pass && c.pass;
  }
  if (!f.out.empty()) {
    for (const auto &id : relaybf::reproduce_cases()) {
      json rep;
      rep["case"] = id;
      rep["checks"] = json::array();
      for (const auto &c : checks)
        if (c.case_id == id) rep["checks"].push_back(check_json(c));
      if (rep["checks"].empty()) continue;
      if (id.rfind("total", 0) == 0) rep["assumptions"] = json::array({"sigma2 = 1", "P0 = 10"});
      else rep["assumptions"] = json::array({"D1 = I realized as Ps = 1, sigma2 = 1, D = I, P_k = 2"});
      write_atomic(out_dir(f) / (id + ".report.json"), rep.dump(2) + "\n");
    }
  }
  std::printf("%s\n", all_pass ? "all checks passed" : "some checks FAILED");
  return all_pass ? kOk : kReproduceMismatch;
}

int cmd_oracle(const std::string &path, const Flags &f) {
  relaybf::Scenario s = relaybf::parse_scenario(path);
  apply_overrides(s, f);
  json j = relaybf::run_oracle(s);
  try {
    const auto r = relaybf::run(s);
    const double solver = s.mode == "total" ? r.report["solver"]["objective"].get<double>()
                                            : r.report["solution"]["snr"].get<double>();
    const double ref = j["oracle"][s.mode == "total" ? "objective" : "snr"].get<double>();
    j["solver"] = r.report["solver"]["solver"];
    j["solver_value"] = solver;
    j["relative_difference"] = (solver - ref) / ref;
  } catch (const relaybf::ConvergenceError &e) {
    j["solver_error"] = e.what();
  }
  const std::string body = j.dump(2) + "\n";
  if (!f.out.empty()) write_atomic(out_dir(f) / (fs::path(path).stem().string() + ".oracle.json"), body);
  std::cout << body;
  return kOk;
}

int cmd_trace_export(const std::string &run, const Flags &f) {
  std::ifstream in(run);
  if (!in) throw relaybf::InputError("trace-export: cannot open " + run);
  const json rep = json::parse(in);
  if (!rep.contains("trace")) throw relaybf::InputError("trace-export: " + run + " has no trace (rerun solve with --trace)");
  const relaybf::SolverTrace t = relaybf::trace_from_json(rep.at("trace"));
  if (f.out.empty()) {
    std::cout << t.to_csv();
  } else {
    std::string stem = fs::path(run).stem().string();
    if (stem.size() > 7 && stem.ends_with(".report")) stem.resize(stem.size() - 7);
    const fs::path dst = out_dir(f) / (stem + ".trace.csv");
    write_atomic(dst, t.to_csv());
    std::cerr << "wrote " << dst.string() << "\n";
  }
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Cooperative AF relay beamforming from second-order channel statistics"};
  app.require_subcommand(1);
  Flags f;
  auto add_flags = [&](CLI::App *c) {
    c->add_option("--tol", f.tol, "SDP duality-gap tolerance")->check(CLI::PositiveNumber);
    c->add_option("--seed", f.seed, "random seed (GRP)");
    c->add_option("--samples", f.samples, "GRP sample count")->check(CLI::PositiveNumber);
    c->add_option("--p", f.p, "p-norm exponent")->check(CLI::Range(2, 1 << 20));
    c->add_flag("--trace", f.trace, "write the iteration trace as CSV");
    c->add_option("--out", f.out, "output directory for reports and traces");
  };
  std::string arg;
  auto *solve = app.add_subcommand("solve", "solve a scenario file and print the report");
  solve->add_option("scenario", arg, "scenario JSON")->required();
  auto *repro = app.add_subcommand("reproduce", "rerun the reference cases and print a pass/fail table");
  repro->add_option("case", arg, "total-1, total-2, indiv-n4, indiv-n6 or all")->required();
  auto *oracle = app.add_subcommand("oracle", "brute-force reference for a small scenario");
  oracle->add_option("scenario", arg, "scenario JSON")->required();
  auto *texport = app.add_subcommand("trace-export", "write the trace stored in a report as CSV");
  texport->add_option("run", arg, "report JSON written by solve --trace")->required();
  for (auto *c : {solve, repro, oracle, texport}) add_flags(c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*solve) return cmd_solve(arg, f);
    if (*repro) return cmd_reproduce(arg, f);
    if (*oracle) return cmd_oracle(arg, f);
    return cmd_trace_export(arg, f);
  } catch (const relaybf::ConvergenceError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const relaybf::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception &e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
}
