#pragma once

#include "k3taut/identities.hpp"
#include "k3taut/io.hpp"
#include "k3taut/suite.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace k3taut::cli {

enum Exit : int { kPass = 0, kInconclusive = 1, kInputError = 2 };

struct Context {
  io::RunConfig config;
  std::string json_out;
  std::ostream& out;
  std::ostream& err;

  VerifyOptions verify() const {
    VerifyOptions v;
    v.term_ceiling = config.term_ceiling;
    return v;
  }

  void write_json(const io::json& doc) const {
    if (json_out.empty()) return;
    std::ofstream f(json_out, std::ios::binary);
    if (!f) throw io::InputError(json_out, 0, 0, "cannot write report");
    f << doc.dump(2) << '\n';
  }
};

inline int exit_for(Status s) {
  switch (s) {
    case Status::CertifiedZero: return kPass;
    case Status::Inconclusive: return kInconclusive;
    case Status::InputError: return kInputError;
  }
  return kInputError;
}

inline io::json wrap_reports(const std::vector<io::ReportRecord>& records) {
  io::json arr = io::json::array();
  for (const auto& r : records) arr.push_back(io::report_to_json(r));
  return io::json{{"schema_version", io::kSchemaVersion}, {"reports", arr}};
}

inline int verify_identity(const Context& ctx, const std::string& name) {
  K3Ring ring(ctx.config.surface);
  std::vector<identities::NamedIdentity> ids;
  try {
    ids = identities::build(ring, name);
  } catch (const std::invalid_argument& e) {
    std::string known;
    for (const auto& n : identities::identity_names()) known += (known.empty() ? "" : ", ") + n;
    ctx.err << "error: " << e.what() << " (known: " << known << ")\n";
    return kInputError;
  }
  std::vector<io::ReportRecord> records;
  int code = kPass;
  for (const auto& id : ids) {
    auto t0 = std::chrono::steady_clock::now();
    TautClass nf = ring.normalize(id.lhs);
    Verdict v;
    v.status = nf.empty() ? Status::CertifiedZero : Status::Inconclusive;
    if (!nf.empty()) {
      v.reason = "normal form is not empty";
      v.residual = nf.to_string();
    }
    v.peak_terms = std::max(id.lhs.size(), nf.size());
    v.trace.push_back({0, 0, "root", id.lhs.size()});
    v.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    ctx.out << id.name << ": " << to_string(v.status) << "\n";
    if (!v.residual.empty()) ctx.out << "  residual: " << v.residual << "\n";
    code = std::max(code, exit_for(v.status));
    records.push_back({io::json{{"identity", id.name}}, v});
  }
  ctx.write_json(wrap_reports(records));
  return code;
}

inline int verify_instances(const Context& ctx, const std::vector<std::string>& files) {
  K3Ring ring(ctx.config.surface);
  std::vector<io::ReportRecord> records(files.size());
  std::vector<std::string> diagnostics(files.size());
  suite::parallel_for(files.size(), ctx.config.workers(), [&](std::size_t i) {
    InstanceSpec spec;
    try {
      io::json doc = io::read_file(files[i]);
      records[i].input = doc;
      spec = io::instance_from_json(doc);
    } catch (const io::InputError& e) {
      std::string msg = e.source.empty() ? files[i] + ": " + e.what() : e.what();
      diagnostics[i] = msg;
      records[i].verdict.status = Status::InputError;
      records[i].verdict.reason = msg;
      return;
    }
    records[i].input = io::instance_to_json(spec);
    records[i].verdict = verify_instance(ring, spec, ctx.verify());
    if (records[i].verdict.status == Status::InputError) diagnostics[i] = files[i] + ": " + records[i].verdict.reason;
  });
  int code = kPass;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const Verdict& v = records[i].verdict;
    code = std::max(code, exit_for(v.status));
    if (!diagnostics[i].empty()) {
      ctx.err << "error: " << diagnostics[i] << "\n";
      continue;
    }
    ctx.out << files[i] << ": " << to_string(v.status) << " (peak " << v.peak_terms << " terms)\n";
    if (!v.certified()) ctx.out << "  " << v.reason << "\n";
    if (!v.residual.empty()) ctx.out << "  residual: " << v.residual << "\n";
  }
  ctx.write_json(wrap_reports(records));
  return code;
}

inline int heisenberg_check(const Context& ctx, int n) {
  if (n < 1 || n > 4) {
    ctx.err << "error: --n must lie in 1..4\n";
    return kInputError;
  }
  suite::SuiteOptions o;
  o.surface = ctx.config.surface;
  auto r = suite::heisenberg_checks(o, n);
  ctx.out << r.line() << "\n";
  for (const auto& step : generate_lowering_closure(std::max(n, 2))) ctx.out << "  " << step.to_string() << "\n";
  ctx.write_json(io::json{{"schema_version", io::kSchemaVersion}, {"n", n}, {"passed", r.passed}, {"detail", r.detail}});
  return r.passed ? kPass : kInconclusive;
}

inline int filtration(const Context& ctx, const std::string& file) {
  io::FiltrationRequest req;
  FiltrationReport rep;
  try {
    req = io::filtration_from_json(io::read_file(file));
    rep = filtration_index(point_square_ring(ctx.config.surface), req.cycle, req.max_m);
  } catch (const io::InputError& e) {
    ctx.err << "error: " << (e.source.empty() ? file + ": " : "") << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    ctx.err << "error: " << file << ": " << e.what() << "\n";
    return kInputError;
  }
  if (rep.index)
    ctx.out << file << ": index " << *rep.index << "\n";
  else
    ctx.out << file << ": Unknown (no power up to " << req.max_m + 1 << " reduced to zero)\n";
  ctx.write_json(io::filtration_report_to_json(req, rep));
  return rep.index ? kPass : kInconclusive;
}

inline int run_suite(const Context& ctx, bool stretch) {
  suite::SuiteOptions o;
  o.surface = ctx.config.surface;
  o.workers = ctx.config.workers();
  o.verify = ctx.verify();
  auto results = suite::run_all(o, stretch, [&](const suite::CriterionResult& r) { ctx.out << r.line() << std::endl; });
  io::json arr = io::json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    arr.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}});
  }
  ctx.write_json(io::json{{"schema_version", io::kSchemaVersion}, {"criteria", arr}});
  return all ? kPass : kInconclusive;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Exact verifier for tautological relations on K3 surfaces and their Hilbert schemes", "k3taut"};
  app.require_subcommand(1);
  std::string config_path, json_out;
  std::optional<unsigned> jobs;
  std::optional<std::size_t> term_ceiling;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--jobs", jobs, "worker threads (0: all hardware threads)");
  app.add_option("--term-ceiling", term_ceiling, "largest intermediate expression size before giving up")->check(CLI::PositiveNumber);
  app.add_option("--json-out", json_out, "write a JSON report to this path");

  std::string identity_name;
  auto* ident = app.add_subcommand("verify-identity", "reduce a built-in identity to normal form");
  ident->add_option("name", identity_name, "identity name")->required();

  std::vector<std::string> instance_files;
  auto* inst = app.add_subcommand("verify-instance", "verify product instances given as JSON files");
  inst->add_option("files", instance_files, "instance files")->required();

  int heis_n = 3;
  auto* heis = app.add_subcommand("heisenberg-check", "check Heisenberg relations and injectivity up to degree n");
  heis->add_option("--n", heis_n, "largest degree")->required();

  std::string filtration_file;
  auto* filt = app.add_subcommand("filtration", "compute the filtration index of a zero-cycle");
  filt->add_option("file", filtration_file, "cycle file")->required();

  bool stretch = false;
  auto* suite_cmd = app.add_subcommand("suite", "run the acceptance criteria");
  suite_cmd->add_flag("--stretch", stretch, "also run the n=3, l=7 target");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  io::RunConfig config;
  try {
    if (!config_path.empty()) config = io::config_from_json(io::read_file(config_path));
  } catch (const io::InputError& e) {
    err << "error: " << (e.source.empty() ? config_path + ": " : "") << e.what() << "\n";
    return kInputError;
  }
  if (jobs) config.parallelism = *jobs;
  if (term_ceiling) config.term_ceiling = *term_ceiling;
  Context ctx{config, json_out.empty() ? config.output : json_out, out, err};

  try {
    if (*ident) return verify_identity(ctx, identity_name);
    if (*inst) return verify_instances(ctx, instance_files);
    if (*heis) return heisenberg_check(ctx, heis_n);
    if (*filt) return filtration(ctx, filtration_file);
    if (*suite_cmd) return run_suite(ctx, stretch);
  } catch (const io::InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace k3taut::cli
