#include "a2x/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "a2x/assignment.hpp"
#include "a2x/dataio.hpp"
#include "a2x/features.hpp"
#include "a2x/mapping.hpp"
#include "a2x/poison.hpp"
#include "a2x/rng.hpp"
#include "a2x/synth.hpp"
#include "a2x/triggers.hpp"

namespace a2x {

ExitStatus exit_status_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kValidation:
    case ErrorKind::kFormat:
    case ErrorKind::kTruncated:
    case ErrorKind::kParameter:
      return ExitStatus::kValidation;
    case ErrorKind::kInfeasible:
    case ErrorKind::kGuard:
      return ExitStatus::kInfeasible;
    case ErrorKind::kIo:
      return ExitStatus::kIo;
  }
  return ExitStatus::kValidation;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename Seq>
std::string join(const Seq& seq) {
  std::string out;
  for (const auto& v : seq) {
    if (!out.empty()) out += ',';
    out += std::to_string(v);
  }
  return out;
}

std::uint32_t checked_count(long long v, const char* name) {
  if (v < 1 || v > static_cast<long long>(UINT32_MAX)) {
    fail(ErrorKind::kParameter, std::string("--") + name + " must be a positive integer");
  }
  return static_cast<std::uint32_t>(v);
}

std::string read_text(const std::string& path) {
  auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const std::string& path, const std::string& text) {
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

struct Globals {
  std::uint64_t seed = 0;
  std::string norm = "l2";
  bool quiet = false;

  Norm parsed_norm() const {
    auto n = parse_norm(norm);
    if (!n) fail(ErrorKind::kParameter, "--norm must be one of l1, l2, linf");
    return *n;
  }
};

class Reporter {
 public:
  Reporter(std::ostream& out, bool quiet) : out_(out), quiet_(quiet) {}

  void kv(const std::string& key, const std::string& value) {
    if (!quiet_) out_ << key << '=' << value << '\n';
  }
  void kv(const std::string& key, double value) { kv(key, fmt_double(value)); }
  void kv(const std::string& key, std::uint64_t value) { kv(key, std::to_string(value)); }

  void score(const MappingScore& s) {
    kv("objective", s.objective);
    if (s.silhouette_mean) kv("silhouette_mean", *s.silhouette_mean);
    kv("self_target_count", std::uint64_t{s.self_target_count});
  }

  void mapping(const Mapping& m) {
    kv("num_classes", std::uint64_t{m.num_classes});
    kv("x", std::uint64_t{m.x});
    kv("targets", join(m.targets));
    kv("table", join(m.table));
  }

 private:
  std::ostream& out_;
  bool quiet_;
};

// plan ------------------------------------------------------------------------

struct PlanArgs {
  std::string embeddings;
  long long x = 0;
  bool forbid_self = false;
  std::string out;
  long long restarts = 10;
  long long max_iters = 300;
  double tol = 1e-6;
};

int cmd_plan(const PlanArgs& a, const Globals& g, Reporter& rep) {
  const auto es = load_embeddings(a.embeddings);
  PlanConfig cfg;
  cfg.x = checked_count(a.x, "x");
  cfg.norm = g.parsed_norm();
  cfg.seed = g.seed;
  cfg.forbid_self_target = a.forbid_self;
  cfg.restarts = checked_count(a.restarts, "restarts");
  cfg.max_iters = checked_count(a.max_iters, "max-iters");
  cfg.tol = a.tol;
  const auto plan = plan_mapping(position_vectors(es), cfg);
  save_mapping(plan.mapping, a.out);
  rep.mapping(plan.mapping);
  rep.kv("groups", nlohmann::json(plan.mapping.groups).dump());
  rep.kv("norm", std::string(to_string(cfg.norm)));
  rep.score(plan.score);
  return 0;
}

// baseline --------------------------------------------------------------------

struct BaselineArgs {
  std::string mode;
  long long k = 0;
  std::optional<long long> x;
  std::string out;
};

int cmd_baseline(const BaselineArgs& a, const Globals& g, Reporter& rep) {
  const std::uint32_t k = checked_count(a.k, "k");
  Mapping m;
  if (a.mode == "cyclic") {
    if (a.x && *a.x != a.k) fail(ErrorKind::kParameter, "cyclic baseline requires x == k");
    m = cyclic_mapping(k);
  } else if (a.mode == "random") {
    if (!a.x) fail(ErrorKind::kParameter, "random baseline requires --x");
    m = random_mapping(k, checked_count(*a.x, "x"), g.seed);
  } else {
    fail(ErrorKind::kParameter, "--mode must be cyclic or random");
  }
  save_mapping(m, a.out);
  rep.mapping(m);
  return 0;
}

// eval ------------------------------------------------------------------------

struct EvalArgs {
  std::string mapping;
  std::string embeddings;
  std::string csv;
};

int cmd_eval(const EvalArgs& a, const Globals& g, Reporter& rep) {
  const auto m = load_mapping(a.mapping);
  const auto es = load_embeddings(a.embeddings);
  if (m.num_classes != es.num_classes) {
    fail(ErrorKind::kValidation, "mapping has K=" + std::to_string(m.num_classes) +
                                     " but embeddings have K=" +
                                     std::to_string(es.num_classes));
  }
  const auto d = distance_matrix(position_vectors(es), g.parsed_norm());
  const auto score = score_mapping(m, d);
  for (const auto& f : validate_mapping(m)) {
    if (f.severity == Finding::Severity::kWarning) rep.kv("warning", f.message);
  }
  rep.kv("num_classes", std::uint64_t{m.num_classes});
  rep.kv("x", std::uint64_t{m.x});
  rep.kv("norm", std::string(to_string(g.parsed_norm())));
  rep.score(score);
  if (!a.csv.empty()) {
    SweepReport single;
    single.rows.push_back({0, m, score});
    write_text(a.csv, sweep_to_csv(single));
  }
  return 0;
}

// sweep -----------------------------------------------------------------------

struct SweepArgs {
  std::string embeddings;
  std::optional<long long> k;
  long long x = 0;
  long long n = 200;
  std::string out;
};

int cmd_sweep(const SweepArgs& a, const Globals& g, Reporter& rep) {
  const auto es = load_embeddings(a.embeddings);
  if (a.k && *a.k != static_cast<long long>(es.num_classes)) {
    fail(ErrorKind::kValidation, "--k does not match the embeddings' class count");
  }
  const auto d = distance_matrix(position_vectors(es), g.parsed_norm());
  if (a.n < 1) fail(ErrorKind::kParameter, "--n must be positive");
  const auto report = sweep_random(es.num_classes, checked_count(a.x, "x"),
                                   static_cast<std::uint64_t>(a.n), g.seed, d);
  write_text(a.out, sweep_to_csv(report));
  rep.kv("rows", std::uint64_t{report.rows.size()});
  double best = 0.0;
  for (const auto& r : report.rows) best = std::max(best, r.score.objective);
  rep.kv("max_objective", best);
  if (report.objective_silhouette_pearson) {
    rep.kv("pearson_objective_silhouette", *report.objective_silhouette_pearson);
  }
  return 0;
}

// trigger / poison ------------------------------------------------------------

struct TriggerArgs {
  std::string dataset;
  std::string trigger;
  std::string out;
};

int cmd_trigger(const TriggerArgs& a, const Globals&, Reporter& rep) {
  const auto ds = load_dataset(a.dataset);
  const auto spec = trigger_from_json(read_text(a.trigger));
  const auto out = trigger_all(ds, spec);
  save_dataset(out, a.out);
  rep.kv("samples", out.n);
  rep.kv("trigger", to_json_value(spec).dump());
  return 0;
}

struct PoisonArgs {
  std::string dataset;
  std::string mapping;
  std::string trigger;
  double rate = 0.0;
  std::string out;
  std::string manifest_out;
};

int cmd_poison(const PoisonArgs& a, const Globals& g, Reporter& rep) {
  if (!(a.rate >= 0.0 && a.rate <= 1.0)) {
    fail(ErrorKind::kParameter, "--rate must lie in [0, 1]");
  }
  const auto ds = load_dataset(a.dataset);
  PoisonPlan plan{a.rate, g.seed, load_mapping(a.mapping),
                  trigger_from_json(read_text(a.trigger))};
  const auto result = poison_dataset(ds, plan);
  save_dataset(result.dataset, a.out);
  save_manifest(result.manifest, a.manifest_out);
  rep.kv("samples", ds.n);
  rep.kv("count", result.manifest.count());
  rep.kv("rate", a.rate);
  rep.kv("seed", g.seed);
  return 0;
}

// synth -----------------------------------------------------------------------

struct SynthArgs {
  long long k = 10;
  long long x_planted = 3;
  long long dim = 16;
  long long per_class = 50;
  double spread = 1.0;
  double separation = 20.0;
  std::string out;
};

int cmd_synth(const SynthArgs& a, const Globals& g, Reporter& rep) {
  SynthConfig cfg;
  cfg.k = checked_count(a.k, "k");
  cfg.x_planted = checked_count(a.x_planted, "x-planted");
  cfg.dim = checked_count(a.dim, "dim");
  cfg.per_class = checked_count(a.per_class, "per-class");
  cfg.spread = a.spread;
  cfg.separation = a.separation;
  cfg.seed = g.seed;
  const auto fx = synthesize(cfg);
  save_embeddings(fx.embeddings, a.out);
  const auto sidecar = planted_sidecar_path(a.out);
  write_text(sidecar.string(), planted_to_json(fx));
  rep.kv("rows", fx.embeddings.n);
  rep.kv("planted_groups", nlohmann::json(fx.planted.groups()).dump());
  rep.kv("sidecar", sidecar.string());
  return 0;
}

// verify ----------------------------------------------------------------------

struct VerifyArgs {
  long long trials = 500;
  long long max_k = 8;
  bool allow_large = false;
};

GroupDistanceMatrix random_instance(std::uint64_t seed, std::uint32_t max_k) {
  Rng rng(seed);
  const auto k = static_cast<std::uint32_t>(1 + rng.below(max_k));
  const auto x = static_cast<std::uint32_t>(1 + rng.below(k));
  const bool integral = rng.below(2) == 0;
  std::vector<double> w(std::size_t{x} * k);
  for (auto& v : w) v = integral ? static_cast<double>(rng.below(101)) : 100.0 * rng.uniform();
  return GroupDistanceMatrix::from_values(x, k, std::move(w));
}

bool compare_solvers(const GroupDistanceMatrix& D, const std::string& label,
                     std::ostream& err) {
  const auto fast = hungarian_max(D);
  const auto slow = brute_force_assign(D);
  const double of = assignment_objective(D, fast.targets);
  const double os = assignment_objective(D, slow.targets);
  if (fast.targets == slow.targets && std::abs(of - os) <= 1e-9) return true;
  err << "mismatch in " << label << " (x=" << D.x << ", K=" << D.num_classes << ")\n"
      << "  weights=" << nlohmann::json(D.values).dump() << "\n"
      << "  hungarian targets=" << join(fast.targets) << " objective=" << fmt_double(of)
      << "\n"
      << "  brute     targets=" << join(slow.targets) << " objective=" << fmt_double(os)
      << "\n";
  return false;
}

int cmd_verify(const VerifyArgs& a, const Globals& g, Reporter& rep, std::ostream& err) {
  if (a.trials < 1) fail(ErrorKind::kParameter, "--trials must be positive");
  const std::uint32_t max_k = checked_count(a.max_k, "max-k");
  if (max_k > 8 && !a.allow_large) {
    fail(ErrorKind::kGuard, "--max-k above 8 makes exhaustive enumeration too slow; "
                            "pass --allow-large to override");
  }
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t mismatches = 0;
  for (long long t = 0; t < a.trials; ++t) {
    const auto D = random_instance(derive_seed(g.seed, static_cast<std::uint64_t>(t)), max_k);
    if (!compare_solvers(D, "trial " + std::to_string(t), err)) ++mismatches;
  }
  // All-equal weights: every injection ties, both must return 0..x-1.
  const std::uint32_t tie_k = std::min<std::uint32_t>(max_k, 8);
  const auto tie = GroupDistanceMatrix::from_values(
      tie_k, tie_k, std::vector<double>(std::size_t{tie_k} * tie_k, 1.0));
  if (!compare_solvers(tie, "forced tie", err)) ++mismatches;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.kv("trials", static_cast<std::uint64_t>(a.trials));
  rep.kv("mismatches", mismatches);
  rep.kv("seconds", secs);
  if (mismatches != 0) return static_cast<int>(ExitStatus::kInfeasible);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Class-mapping optimization and poisoning toolkit for all-to-X backdoors",
               "a2x"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice (default 0)");
  app.add_option("--norm", g.norm, "Class distance norm: l1, l2 or linf")
      ->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Suppress the key=value report");

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Optimize a mapping from embeddings");
  plan->fallthrough();
  plan->add_option("embeddings", plan_args.embeddings, "A2XE embeddings file")->required();
  plan->add_option("--x", plan_args.x, "Number of groups / targets")->required();
  plan->add_flag("--forbid-self-target", plan_args.forbid_self,
                 "Never send a group to one of its own classes");
  plan->add_option("--out", plan_args.out, "Mapping JSON to write")->required();
  plan->add_option("--restarts", plan_args.restarts, "k-means restarts");
  plan->add_option("--max-iters", plan_args.max_iters, "k-means iteration cap");
  plan->add_option("--tol", plan_args.tol, "k-means centroid shift tolerance");

  BaselineArgs base_args;
  auto* base = app.add_subcommand("baseline", "Write a cyclic or random mapping");
  base->fallthrough();
  base->add_option("--mode", base_args.mode, "cyclic or random")->required();
  base->add_option("--k", base_args.k, "Number of classes")->required();
  base->add_option("--x", base_args.x, "Number of groups (random mode)");
  base->add_option("--out", base_args.out, "Mapping JSON to write")->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Score a mapping on embeddings");
  eval->fallthrough();
  eval->add_option("mapping", eval_args.mapping, "Mapping JSON")->required();
  eval->add_option("embeddings", eval_args.embeddings, "A2XE embeddings file")->required();
  eval->add_option("--csv", eval_args.csv, "Also write the score as a CSV row");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Score n random mappings");
  sweep->fallthrough();
  sweep->add_option("embeddings", sweep_args.embeddings, "A2XE embeddings file")->required();
  sweep->add_option("--k", sweep_args.k, "Expected number of classes");
  sweep->add_option("--x", sweep_args.x, "Number of groups")->required();
  sweep->add_option("--n", sweep_args.n, "Number of random mappings")->capture_default_str();
  sweep->add_option("--out", sweep_args.out, "CSV report to write")->required();

  TriggerArgs trig_args;
  auto* trig = app.add_subcommand("trigger", "Apply a trigger to every sample");
  trig->fallthrough();
  trig->add_option("dataset", trig_args.dataset, "A2XD dataset")->required();
  trig->add_option("--trigger", trig_args.trigger, "Trigger spec JSON file")->required();
  trig->add_option("--out", trig_args.out, "A2XD dataset to write")->required();

  PoisonArgs poison_args;
  auto* poison = app.add_subcommand("poison", "Build a poisoned training set");
  poison->fallthrough();
  poison->add_option("dataset", poison_args.dataset, "A2XD dataset")->required();
  poison->add_option("--mapping", poison_args.mapping, "Mapping JSON")->required();
  poison->add_option("--trigger", poison_args.trigger, "Trigger spec JSON file")->required();
  poison->add_option("--rate", poison_args.rate, "Poisoning rate in [0, 1]")->required();
  poison->add_option("--out", poison_args.out, "A2XD dataset to write")->required();
  poison->add_option("--manifest-out", poison_args.manifest_out, "Manifest JSON to write")
      ->required();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate planted-structure embeddings");
  synth->fallthrough();
  synth->add_option("--k", synth_args.k)->capture_default_str();
  synth->add_option("--x-planted", synth_args.x_planted)->capture_default_str();
  synth->add_option("--dim", synth_args.dim)->capture_default_str();
  synth->add_option("--per-class", synth_args.per_class)->capture_default_str();
  synth->add_option("--spread", synth_args.spread)->capture_default_str();
  synth->add_option("--separation", synth_args.separation)->capture_default_str();
  synth->add_option("--out", synth_args.out, "A2XE embeddings to write")->required();

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Check the Hungarian solver against brute force");
  verify->fallthrough();
  verify->add_option("--trials", verify_args.trials)->capture_default_str();
  verify->add_option("--max-k", verify_args.max_k)->capture_default_str();
  verify->add_flag("--allow-large", verify_args.allow_large,
                   "Permit --max-k above 8");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitStatus::kValidation);
  }

  Reporter rep(out, g.quiet);
  try {
    if (*plan) return cmd_plan(plan_args, g, rep);
    if (*base) return cmd_baseline(base_args, g, rep);
    if (*eval) return cmd_eval(eval_args, g, rep);
    if (*sweep) return cmd_sweep(sweep_args, g, rep);
    if (*trig) return cmd_trigger(trig_args, g, rep);
    if (*poison) return cmd_poison(poison_args, g, rep);
    if (*synth) return cmd_synth(synth_args, g, rep);
    if (*verify) return cmd_verify(verify_args, g, rep, err);
  } catch (const Error& e) {
    err << "a2x: " << to_string(e.kind()) << " error: " << e.what() << '\n';
    return static_cast<int>(exit_status_for(e.kind()));
  }
  return static_cast<int>(ExitStatus::kValidation);
}

}  // namespace a2x
