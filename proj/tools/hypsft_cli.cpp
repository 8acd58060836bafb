// hypsft: command-line driver for the shelling / population pipeline.
//
// Every command prints one report (key: value text, or JSON with --json) and
// exits 0 when it found no violations, 1 when it did, 2 on a staged error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hypsft/divergence.hpp"
#include "hypsft/errors.hpp"
#include "hypsft/fsa.hpp"
#include "hypsft/growth.hpp"
#include "hypsft/oracle.hpp"
#include "hypsft/population.hpp"
#include "hypsft/sft.hpp"
#include "hypsft/shelling.hpp"

using namespace hypsft;
using Report = nlohmann::ordered_json;

namespace {

constexpr int kMaxPrecisionBits = 166;  // mpfr_float_50

struct RunConfig {
  std::string presentation;
  std::string fsa_path;
  std::optional<int> delta;
  int delta_radius = 4;
  int rho = 2;
  int ball_radius = 4;
  int patch_radius = 6;
  int basepoint_length = 7;
  int depth = 1;
  int q = 2;
  double nu0 = -1;
  double A = -1;
  int N = 1;
  int precision_bits = 0;
  std::uint64_t seed = 1;
  std::size_t max_elements = 3'000'000;
  std::string out_dir = ".";
  bool json = false;

  void validate(int validated_radius) const {
    if (precision_bits < 64 || precision_bits > kMaxPrecisionBits)
      throw ConfigError("cli", "precision bits must lie in [64, " + std::to_string(kMaxPrecisionBits) + "], got " +
                                   std::to_string(precision_bits));
    if (ball_radius < 0 || patch_radius < 1 || depth < 1 || basepoint_length < 0)
      throw ConfigError("cli", "radii must be positive");
    if (patch_radius + basepoint_length > validated_radius)
      throw ConfigError("cli", "patch radius plus basepoint length exceeds the validated radius " +
                                   std::to_string(validated_radius));
    if (depth > patch_radius) throw ConfigError("cli", "depth exceeds the patch radius");
    if (q != 2 && q != 3) throw ConfigError("cli", "q must be 2 or 3");
    if (rho < 1) throw ConfigError("cli", "rho must be positive");
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cli", "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string write_artifact(const RunConfig& cfg, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(cfg.out_dir);
  const std::string path = (std::filesystem::path(cfg.out_dir) / name).string();
  std::ofstream out(path);
  if (!out) throw InputError("cli", "cannot write " + path);
  out << text;
  return path;
}

std::string str(const Real& x, int digits = 20) { return x.str(digits); }

// Lazily built group data shared by the commands.
class Context {
 public:
  explicit Context(const RunConfig& cfg) : cfg_(cfg) {}

  const GroupOracle& oracle() {
    if (!oracle_) {
      OracleOptions opts;
      opts.max_elements = cfg_.max_elements;
      oracle_ = std::make_unique<GroupOracle>(Presentation::from_file(cfg_.presentation),
                                              OracleMode::DehnSmallCancellation, opts);
    }
    return *oracle_;
  }
  const ShortlexFsa& fsa() {
    if (!fsa_) {
      fsa_ = cfg_.fsa_path.empty() ? build_shortlex_fsa(oracle(), 0, 6)
                                   : ShortlexFsa::from_file(cfg_.fsa_path, oracle().presentation());
      fsa_source_ = cfg_.fsa_path.empty() ? "built" : cfg_.fsa_path;
    }
    return *fsa_;
  }
  const GrowthData& growth() {
    if (!growth_) growth_ = analyze_growth(fsa());
    return *growth_;
  }
  int delta() {
    if (!delta_) delta_ = cfg_.delta ? *cfg_.delta : oracle().estimate_delta(cfg_.delta_radius);
    return *delta_;
  }
  const RuleDictionary& dictionary() {
    if (!dict_) dict_ = build_exact_rule_dictionary(oracle(), fsa(), delta(), cfg_.rho);
    return *dict_;
  }
  std::vector<char> mu_positive() {
    std::vector<char> out;
    for (const auto& m : growth().mu) out.push_back(m > 0);
    return out;
  }

  // Settings every report records.
  void header(Report& r, const std::string& command) {
    r["command"] = command;
    r["presentation"] = cfg_.presentation;
    r["precision_bits"] = cfg_.precision_bits;
    r["working_precision_bits"] = kMaxPrecisionBits;
    if (fsa_) r["fsa"] = fsa_source_;
    if (delta_) {
      r["delta"] = *delta_;
      r["delta_source"] = cfg_.delta ? std::string("override")
                                     : "estimate at radius " + std::to_string(cfg_.delta_radius) + " (lower bound)";
    }
  }

 private:
  const RunConfig& cfg_;
  std::unique_ptr<GroupOracle> oracle_;
  std::optional<ShortlexFsa> fsa_;
  std::string fsa_source_;
  std::optional<GrowthData> growth_;
  std::optional<int> delta_;
  std::optional<RuleDictionary> dict_;
};

Report violations_json(const std::vector<Violation>& v, std::size_t limit = 50) {
  Report out = Report::array();
  for (std::size_t i = 0; i < v.size() && i < limit; ++i)
    out.push_back({{"kind", v[i].kind}, {"cell", v[i].cell}, {"detail", v[i].detail}});
  return out;
}

// ---------------------------------------------------------------- rendering

void render_text(const Report& r, std::ostream& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  auto scalar = [](const Report& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (const auto& [key, v] : r.items()) {
    if (v.is_object()) {
      out << pad << key << ":\n";
      render_text(v, out, indent + 2);
    } else if (v.is_array() && !v.empty() && v.front().is_object()) {
      out << pad << key << ":\n";
      for (const auto& e : v) {
        out << pad << "  -";
        for (const auto& [k, x] : e.items()) out << " " << k << "=" << scalar(x);
        out << "\n";
      }
    } else if (v.is_array()) {
      out << pad << key << ":";
      for (const auto& e : v) out << " " << scalar(e);
      out << "\n";
    } else {
      out << pad << key << ": " << scalar(v) << "\n";
    }
  }
}

int finish(const RunConfig& cfg, Report& r, bool ok) {
  r["status"] = ok ? "ok" : "violations";
  if (cfg.json)
    std::cout << r.dump(2) << "\n";
  else
    render_text(r, std::cout, 0);
  return ok ? 0 : 1;
}

// ------------------------------------------------------------------ commands

int cmd_ball(const RunConfig& cfg, Context& ctx) {
  Report r;
  ctx.header(r, "ball");
  const GroupOracle& o = ctx.oracle();
  const PieceReport& pr = o.piece_report();
  r["small_cancellation"] = pr.small_cancellation;
  r["max_piece"] = pr.max_piece;
  r["shortest_relator"] = pr.shortest_relator;
  const BallTable b = o.build_ball(cfg.ball_radius);
  r["radius"] = b.radius();
  r["sphere_sizes"] = b.sphere_sizes();
  r["ball_size"] = b.size();
  return finish(cfg, r, true);
}

int cmd_delta(const RunConfig& cfg, Context& ctx) {
  const int d = ctx.delta();
  Report r;
  ctx.header(r, "delta");
  r["delta"] = d;
  r["rule_radius"] = rule_radius(d);
  r["rho"] = cfg.rho;
  r["note"] = "finite-radius estimates are lower bounds for the true delta";
  return finish(cfg, r, true);
}

Report fsa_validation(Context& ctx, const RunConfig& cfg, bool& ok) {
  const FsaValidationReport v = validate_fsa(ctx.fsa(), ctx.oracle(), cfg.ball_radius);
  ok = v.ok();
  Report r;
  r["validated_radius"] = v.radius;
  r["path_counts"] = v.path_counts;
  r["sphere_sizes"] = v.sphere_sizes;
  Report list = Report::array();
  for (const auto& x : v.violations) list.push_back({{"length", x.length}, {"detail", x.detail}});
  r["violations"] = list;
  r["note"] = "agreement is certified only up to the validated radius";
  return r;
}

int cmd_fsa(const RunConfig& cfg, Context& ctx, const std::string& mode) {
  if (mode == "validate" && cfg.fsa_path.empty()) throw ConfigError("cli", "fsa validate needs --fsa");
  const ShortlexFsa& fsa = ctx.fsa();
  Report r;
  ctx.header(r, "fsa " + mode);
  r["states"] = fsa.num_states();
  r["transitions"] = fsa.num_transitions();
  if (mode == "build") r["written"] = write_artifact(cfg, "fsa.txt", fsa.to_text(ctx.oracle().presentation()));
  bool ok = true;
  r["validation"] = fsa_validation(ctx, cfg, ok);
  return finish(cfg, r, ok);
}

int cmd_growth(const RunConfig& cfg, Context& ctx) {
  const GrowthData& g = ctx.growth();
  Report r;
  ctx.header(r, "growth");
  r["lambda_lo"] = str(g.lambda.lo);
  r["lambda_hi"] = str(g.lambda.hi);
  r["eigen_residual"] = str(g.residual, 6);
  Report comps = Report::array();
  for (std::size_t i = 0; i < g.partition.components.size(); ++i) {
    const Component& c = g.partition.components[i];
    const int s = c.states.front();
    comps.push_back({{"component", i},
                     {"states", c.states.size()},
                     {"class", to_string(g.partition.cls[static_cast<std::size_t>(s)])},
                     {"perron", str(c.perron, 12)}});
  }
  r["components"] = comps;
  Report mu = Report::array();
  for (std::size_t s = 0; s < g.mu.size(); ++s)
    mu.push_back({{"state", s},
                  {"class", to_string(g.partition.cls[s])},
                  {"mu", str(g.mu[s], 15)}});
  r["mu"] = mu;
  for (int q : {2, 3}) {
    const IncommensurabilityReport ir = check_incommensurable(g, q);
    r["incommensurable_q" + std::to_string(q)] =
        ir.incommensurable ? std::string("yes")
                           : "no (" + std::to_string(q) + "^" + std::to_string(ir.relation_m) + " = lambda^" +
                                 std::to_string(ir.relation_n) + ")";
  }
  r["warnings"] = g.partition.warnings;
  return finish(cfg, r, g.partition.warnings.empty());
}

Report dictionary_json(const RuleDictionary& d) {
  return {{"rho", d.rho},
          {"windows", d.patterns.size()},
          {"exact", d.exact()},
          {"saturated", d.saturated()}};
}

int cmd_shell(const RunConfig& cfg, Context& ctx, const std::string& mode, const std::string& patch_path) {
  const GroupOracle& o = ctx.oracle();
  ShellingPatch patch;
  Report r;
  if (mode == "generate") {
    std::mt19937_64 rng(cfg.seed);
    patch = generate_shelling_patch(o, ctx.fsa(), cfg.patch_radius, cfg.basepoint_length, ctx.delta(), rng);
  } else {
    if (patch_path.empty()) throw ConfigError("cli", "shell check needs --patch");
    patch = read_patch(read_file(patch_path), o);
    if (cfg.delta && *cfg.delta != patch.delta) throw ConfigError("cli", "--delta disagrees with the patch header");
  }
  ctx.header(r, "shell " + mode);
  r["radius"] = patch.radius;
  r["basepoint"] = o.presentation().format_word(patch.basepoint);
  r["cells"] = patch.num_cells();
  if (mode == "generate") r["written"] = write_artifact(cfg, "patch.txt", write_patch(patch, o.presentation()));
  std::vector<Violation> v = check_preshelling(patch, o.presentation());
  const auto local = check_shortlex_local_rules(patch, ctx.fsa(), ctx.dictionary());
  v.insert(v.end(), local.begin(), local.end());
  r["dictionary"] = dictionary_json(ctx.dictionary());
  r["violation_count"] = v.size();
  r["violations"] = violations_json(v);
  return finish(cfg, r, v.empty());
}

// Levels too close to the rim have no depth-D future; those are skipped.
std::optional<DivergenceGraph> try_graph(const ShellingPatch& patch, const std::vector<char>& mu, int level, int depth) {
  try {
    return build_divergence_graph(patch, mu, level, depth);
  } catch (const ConfigError&) {
    return std::nullopt;
  }
}

int cmd_divergence(const RunConfig& cfg, Context& ctx, const std::string& patch_path, std::optional<int> level) {
  if (patch_path.empty()) throw ConfigError("cli", "divergence needs --patch");
  const ShellingPatch patch = read_patch(read_file(patch_path), ctx.oracle());
  if (cfg.depth > patch.radius) throw ConfigError("cli", "depth exceeds the patch radius");
  const auto mu = ctx.mu_positive();
  const int ball = ctx.oracle().build_ball(2 * patch.delta).size();
  std::vector<int> levels;
  if (level) {
    levels.push_back(*level);
  } else {
    for (const auto& [h, cells] : horospheres(patch)) levels.push_back(h);
  }
  Report r;
  ctx.header(r, "divergence");
  r["patch_delta"] = patch.delta;
  r["depth"] = cfg.depth;
  r["note"] = "edges are computed at finite depth; stability is reported against depth - 1";
  Report list = Report::array();
  bool ok = true;
  int graphs = 0;
  for (int lv : levels) {
    const auto g = try_graph(patch, mu, lv, cfg.depth);
    if (!g || std::none_of(g->interior.begin(), g->interior.end(), [](char c) { return c != 0; })) continue;
    const auto lower = try_graph(patch, mu, lv - 1, cfg.depth);
    const auto upper = try_graph(patch, mu, lv + 1, std::max(1, cfg.depth - 1));
    const DivergenceReport d =
        check_divergence_properties(patch, *g, ball, lower ? &*lower : nullptr, upper ? &*upper : nullptr);
    ok = ok && d.ok();
    ++graphs;
    list.push_back({{"level", d.level},
                    {"vertices", d.vertices},
                    {"interior", d.interior_vertices},
                    {"edges", d.edges},
                    {"edges_prev_depth", d.edges_previous_depth},
                    {"max_edge_length", d.max_edge_length},
                    {"edge_bound", d.edge_bound},
                    {"max_degree", d.max_degree},
                    {"degree_bound", d.degree_bound},
                    {"dense", d.dense},
                    {"interior_connected", d.interior_connected},
                    {"predecessor_failures", d.predecessor_failures},
                    {"successor_failures", d.successor_failures},
                    {"ok", d.ok()}});
  }
  r["graphs"] = graphs;
  r["levels"] = list;
  return finish(cfg, r, ok);
}

Real optional_real(double x) { return x > 0 ? Real(x) : Real(-1); }

Report population_json(const PopulatedPatch& pp) {
  Report levels = Report::array();
  for (const auto& [level, d] : pp.delta_per_level) levels.push_back({{"level", level}, {"delta", d}});
  return {{"q", pp.params.q},
          {"A", str(pp.params.A, 12)},
          {"N", pp.params.N},
          {"L", pp.params.L},
          {"locality", pp.params.locality},
          {"depth", pp.params.depth},
          {"matches", pp.matching.size()},
          {"levels", levels}};
}

int cmd_populate(const RunConfig& cfg, Context& ctx) {
  const GroupOracle& o = ctx.oracle();
  std::mt19937_64 rng(cfg.seed);
  const ShellingPatch patch = generate_shelling_patch(o, ctx.fsa(), cfg.patch_radius, cfg.basepoint_length, ctx.delta(), rng);
  PopulatedPatch pp = populate_patch(patch, ctx.growth(), cfg.q, optional_real(cfg.nu0), cfg.depth, optional_real(cfg.A));
  Report r;
  ctx.header(r, "populate");
  r["radius"] = pp.base.radius;
  r["basepoint"] = o.presentation().format_word(pp.base.basepoint);
  r["population"] = population_json(pp);
  r["written"] = write_artifact(cfg, "populated.txt", write_populated_patch(pp, o.presentation()));
  const auto v = check_populated_rules(pp, o.presentation(), &ctx.fsa(), &ctx.dictionary());
  r["dictionary"] = dictionary_json(ctx.dictionary());
  r["warnings"] = pp.warnings;
  r["violation_count"] = v.size();
  r["violations"] = violations_json(v);
  return finish(cfg, r, v.empty());
}

PopulatedPatch load_populated(Context& ctx, const std::string& path) {
  if (path.empty()) throw ConfigError("cli", "a populated patch is needed (--patch)");
  PopulatedPatch pp = read_populated_patch(read_file(path), ctx.oracle());
  attach_population_context(pp, ctx.growth());
  return pp;
}

int cmd_verify(const RunConfig& cfg, Context& ctx, const std::string& patch_path) {
  const PopulatedPatch pp = load_populated(ctx, patch_path);
  const auto v = check_populated_rules(pp, ctx.oracle().presentation(), &ctx.fsa(), &ctx.dictionary());
  Report r;
  ctx.header(r, "verify");
  r["patch"] = patch_path;
  r["radius"] = pp.base.radius;
  r["population"] = population_json(pp);
  r["dictionary"] = dictionary_json(ctx.dictionary());
  r["violation_count"] = v.size();
  r["violations"] = violations_json(v);
  return finish(cfg, r, v.empty());
}

int cmd_analyze(const RunConfig& cfg, Context& ctx, const std::string& patch_path, int cone_depth,
                int cone_radius) {
  const PopulatedPatch pp = load_populated(ctx, patch_path);
  std::vector<int> deltas;
  for (const auto& [level, d] : pp.delta_per_level) deltas.push_back(d);
  Report r;
  ctx.header(r, "analyze");
  r["delta_window"] = deltas;
  if (!deltas.empty()) {
    const int max_period = std::max(1, static_cast<int>(deltas.size()) / 2);
    const GrowthSequenceReport g = analyze_growth_sequence(deltas, pp.params.q, ctx.growth().lambda.mid(), max_period);
    r["period"] = g.period;
    r["mean_delta"] = g.mean_delta;
    r["mean_log_deviation"] = g.mean_log_deviation;
    r["periodic_consistent"] = g.periodic_consistent;
    if (deltas.size() < 8) r["note"] = "window too short for a meaningful periodicity test";
  }
  const int radius = cone_radius > 0 ? cone_radius : 4 * pp.base.delta;
  int villages = 0, worst = 0, outside = 0;
  if (pp.levels.size() >= 2) {
    const int n = std::min(cone_depth, static_cast<int>(pp.levels.size()) - 1);
    r["cone_depth"] = n;
    r["cone_radius"] = radius;
    for (int c = 0; c < pp.base.num_cells(); ++c) {
      if (pp.base.h[static_cast<std::size_t>(c)] != pp.levels.front() || !pp.parent_interior(c)) continue;
      if (pp.base.pop[static_cast<std::size_t>(c)] <= 0) continue;
      const DescendantReport d = check_descendant_cone(pp, c, n, radius);
      ++villages;
      worst = std::max(worst, d.max_deviation);
      outside += d.inside ? 0 : 1;
    }
  }
  r["villages_checked"] = villages;
  r["max_cone_deviation"] = worst;
  r["villages_outside_cone"] = outside;
  return finish(cfg, r, outside == 0);
}

int cmd_color(const RunConfig& cfg, Context& ctx) {
  const GroupOracle& o = ctx.oracle();
  const TorsionColoring tc = torsion_coloring(o, cfg.N, cfg.ball_radius);
  const PatternRuleSet rules = coloring_rule_set(o, cfg.N, tc.num_colors);
  const long conflicts = coloring_conflicts(o, tc);
  const auto v = check_pattern_rules(tc.color, rules, tc.domain);
  Report r;
  ctx.header(r, "color");
  r["N"] = cfg.N;
  r["radius"] = cfg.ball_radius;
  r["colors"] = tc.num_colors;
  r["conflicts"] = conflicts;
  r["written"] = write_artifact(cfg, "coloring_rules.txt", rules.to_text(o.presentation()));
  r["violation_count"] = v.size();
  r["violations"] = violations_json(v);
  return finish(cfg, r, conflicts == 0 && v.empty());
}

int cmd_export(const RunConfig& cfg, Context& ctx, const std::string& patch_path, std::optional<int> level,
               const std::string& format) {
  if (patch_path.empty()) throw ConfigError("cli", "export-dot needs --patch");
  const ShellingPatch patch = read_patch(read_file(patch_path), ctx.oracle());
  const int lv = level.value_or(0);
  const DivergenceGraph g = build_divergence_graph(patch, ctx.mu_positive(), lv, cfg.depth);
  const Presentation& p = ctx.oracle().presentation();
  const bool dot = format == "dot";
  const std::string name = "divergence_level" + std::to_string(lv) + (dot ? ".dot" : ".adj");
  Report r;
  ctx.header(r, "export-dot");
  r["level"] = lv;
  r["depth"] = cfg.depth;
  r["vertices"] = g.vertices.size();
  r["edges"] = g.num_edges();
  r["written"] = write_artifact(cfg, name, dot ? export_dot(patch, g, p) : export_adjacency(patch, g, p));
  return finish(cfg, r, true);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shellings, divergence graphs and populations on hyperbolic groups"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;
  std::optional<int> precision;
  app.add_option("-p,--presentation", cfg.presentation, "presentation file")->required()->check(CLI::ExistingFile);
  app.add_option("--fsa", cfg.fsa_path, "shortlex automaton file (built when absent)")->check(CLI::ExistingFile);
  app.add_option("--delta", cfg.delta, "hyperbolicity constant override");
  app.add_option("--delta-radius", cfg.delta_radius, "ball radius for the delta estimate");
  app.add_option("--rho", cfg.rho, "rule window radius");
  app.add_option("--ball-radius", cfg.ball_radius, "ball / validation radius");
  app.add_option("--patch-radius", cfg.patch_radius, "patch radius");
  app.add_option("--basepoint-length", cfg.basepoint_length, "length of the random basepoint");
  app.add_option("--depth", cfg.depth, "divergence depth");
  app.add_option("-q", cfg.q, "population base (2 or 3)");
  app.add_option("--nu0", cfg.nu0, "initial density (default A)");
  app.add_option("--A", cfg.A, "balanced-sequence constant A (default from mu)");
  app.add_option("--N", cfg.N, "torsion bound for colourings");
  app.add_option("--precision-bits", precision, "requested precision (env HYPSFT_PRECISION_BITS)");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--max-elements", cfg.max_elements, "element budget for ball enumeration");
  app.add_option("-o,--out", cfg.out_dir, "output directory for artifacts");
  app.add_flag("--json", cfg.json, "emit the report as JSON");

  std::string patch_path, format = "dot";
  std::optional<int> level;
  int cone_depth = 1, cone_radius = 0;

  auto* ball = app.add_subcommand("ball", "enumerate a ball and its sphere sizes");
  auto* delta = app.add_subcommand("delta", "estimate the hyperbolicity constant");
  auto* fsa = app.add_subcommand("fsa", "build or validate the shortlex automaton");
  fsa->require_subcommand(1);
  auto* fsa_build = fsa->add_subcommand("build", "build and write fsa.txt");
  auto* fsa_validate = fsa->add_subcommand("validate", "validate --fsa against the ball");
  auto* growth = app.add_subcommand("growth", "growth rate, partition and mu table");
  auto* shell = app.add_subcommand("shell", "generate or check shelling patches");
  shell->require_subcommand(1);
  auto* shell_gen = shell->add_subcommand("generate", "generate and write patch.txt");
  auto* shell_check = shell->add_subcommand("check", "check a patch file");
  shell_check->add_option("--patch", patch_path, "patch file")->required();
  auto* divergence = app.add_subcommand("divergence", "divergence graph checks on a patch");
  divergence->add_option("--patch", patch_path, "patch file")->required();
  divergence->add_option("--level", level, "single level (default: every level with interior vertices)");
  auto* populate = app.add_subcommand("populate", "generate a populated patch");
  auto* verify = app.add_subcommand("verify", "check a populated patch");
  verify->add_option("--patch", patch_path, "populated patch file")->required();
  auto* analyze = app.add_subcommand("analyze", "growth-sequence and descendant-cone analysis");
  analyze->add_option("--patch", patch_path, "populated patch file")->required();
  analyze->add_option("--cone-depth", cone_depth, "generations to follow");
  analyze->add_option("--cone-radius", cone_radius, "allowed deviation (default 4 delta)");
  auto* color = app.add_subcommand("color", "distance colouring of a ball");
  auto* exporter = app.add_subcommand("export-dot", "export one divergence graph");
  exporter->add_option("--patch", patch_path, "patch file")->required();
  exporter->add_option("--level", level, "level (default 0)");
  exporter->add_option("--format", format, "dot or adjacency")->check(CLI::IsMember({"dot", "adjacency"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (precision) {
      cfg.precision_bits = *precision;
    } else if (const char* env = std::getenv("HYPSFT_PRECISION_BITS")) {
      try {
        cfg.precision_bits = std::stoi(env);
      } catch (const std::exception&) {
        throw ConfigError("cli", std::string("HYPSFT_PRECISION_BITS is not an integer: ") + env);
      }
    } else {
      cfg.precision_bits = kMaxPrecisionBits;
    }
    Context ctx(cfg);
    cfg.validate(ctx.oracle().options().validated_radius);

    if (*ball) return cmd_ball(cfg, ctx);
    if (*delta) return cmd_delta(cfg, ctx);
    if (*fsa_build) return cmd_fsa(cfg, ctx, "build");
    if (*fsa_validate) return cmd_fsa(cfg, ctx, "validate");
    if (*growth) return cmd_growth(cfg, ctx);
    if (*shell_gen) return cmd_shell(cfg, ctx, "generate", "");
    if (*shell_check) return cmd_shell(cfg, ctx, "check", patch_path);
    if (*divergence) return cmd_divergence(cfg, ctx, patch_path, level);
    if (*populate) return cmd_populate(cfg, ctx);
    if (*verify) return cmd_verify(cfg, ctx, patch_path);
    if (*analyze) return cmd_analyze(cfg, ctx, patch_path, cone_depth, cone_radius);
    if (*color) return cmd_color(cfg, ctx);
    if (*exporter) return cmd_export(cfg, ctx, patch_path, level, format);
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << " (partial radius " << e.partial_radius() << ")\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: cli: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
