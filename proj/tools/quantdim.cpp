// quantdim: spectra, critical exponents, quantizers, partitions and the
// acceptance suite from the command line. Every run writes run.json with
// its full configuration next to the artifacts.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quantdim/acceptance.hpp"
#include "quantdim/cascade_profile.hpp"
#include "quantdim/dyadic_measure.hpp"
#include "quantdim/io.hpp"
#include "quantdim/oracles.hpp"
#include "quantdim/partitions.hpp"
#include "quantdim/quantizer.hpp"
#include "quantdim/spec_json.hpp"
#include "quantdim/spectra.hpp"

namespace {

using namespace quantdim;
namespace fs = std::filesystem;

struct Global {
  std::string spec_file;
  std::string inline_spec;
  int depth = 10;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::string norm = "euclid";
};

struct Params {
  double order = -0.5;
  std::string q_grid = "0:3:0.05";
  std::string n_list = "2:64";
  std::string strategy = "dp1d";
  int grid = 10;
  int starts = 4;
  int eval_depth = 0;
  std::size_t budget = 0;
  double x = 0.0;
  std::string alphas;
  std::string levels;
  std::string suite = "all";
  bool list = false;
  std::string oracle_action = "list";
  std::string oracle_name;
  std::string oracle_op = "metadata";
  int oracle_n = 1;
  double q = 1.0;
  std::string probabilities = "0.66,0.2,0.08,0.06";
  double s = 1.0;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SpecError("not a number: '" + s + "'");
  }
}

/// "lo:hi:step" or a comma list.
std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    const auto f = split(s, ':');
    if (f.size() != 3) throw SpecError("grid must be lo:hi:step");
    const double lo = to_double(f[0]), hi = to_double(f[1]), step = to_double(f[2]);
    if (!(step > 0.0) || hi < lo) throw SpecError("grid needs step > 0 and hi >= lo");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
  }
  for (const auto& f : split(s, ',')) out.push_back(to_double(f));
  if (out.empty()) throw SpecError("empty grid");
  return out;
}

/// "a:b" (all integers), "a:b:xk" (geometric, factor k) or a comma list.
std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  const auto f = split(s, s.find(':') != std::string::npos ? ':' : ',');
  if (s.find(':') != std::string::npos) {
    if (f.size() < 2 || f.size() > 3) throw SpecError("integer list must be a:b, a:b:step or a:b:xk");
    const int a = static_cast<int>(to_double(f[0])), b = static_cast<int>(to_double(f[1]));
    if (a < 1 || b < a) throw SpecError("integer list needs 1 <= a <= b");
    if (f.size() == 3 && f[2][0] == 'x') {
      const int k = static_cast<int>(to_double(f[2].substr(1)));
      if (k < 2) throw SpecError("geometric factor must be >= 2");
      for (long n = a; n <= b; n *= k) out.push_back(static_cast<int>(n));
    } else {
      const int step = f.size() == 3 ? static_cast<int>(to_double(f[2])) : 1;
      if (step < 1) throw SpecError("step must be >= 1");
      for (int n = a; n <= b; n += step) out.push_back(n);
    }
    return out;
  }
  for (const auto& x : f) out.push_back(static_cast<int>(to_double(x)));
  if (out.empty()) throw SpecError("empty integer list");
  return out;
}

Norm parse_norm(const std::string& s) {
  if (s == "euclid") return Norm::Euclid;
  if (s == "max") return Norm::Max;
  throw SpecError("norm must be euclid or max");
}

Strategy parse_strategy(const std::string& s) {
  if (s == "dp1d") return Strategy::Dp1d;
  if (s == "lloyd") return Strategy::Lloyd;
  if (s == "exhaustive") return Strategy::Exhaustive;
  throw SpecError("strategy must be dp1d, lloyd or exhaustive");
}

MeasureSpec load_spec(const Global& g) {
  if (!g.spec_file.empty() && !g.inline_spec.empty()) throw SpecError("give either --spec or --inline, not both");
  if (!g.spec_file.empty()) return spec_from_file(g.spec_file);
  if (!g.inline_spec.empty()) return spec_from_string(g.inline_spec);
  throw SpecError("a measure spec is required (--spec FILE or --inline JSON)");
}

std::string out_path(const Global& g, const std::string& name) { return (fs::path(g.out) / name).string(); }

void prepare_out(const Global& g) {
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec) throw Error("cannot create output directory '" + g.out + "'");
}

void write_json(const Global& g, const std::string& name, const json& j) { io::write_file(out_path(g, name), j.dump(2) + "\n"); }

json config_json(const std::string& command, const Global& g, const Params& p, const std::optional<MeasureSpec>& spec) {
  json j;
  j["version"] = kArtifactVersion;
  j["command"] = command;
  j["protocol"] = protocol_name(DepthProtocol::MaxLastIntercept_v1);
  if (spec) j["spec"] = spec_to_json(*spec);
  j["depth"] = g.depth;
  j["seed"] = g.seed;
  j["norm"] = g.norm;
  if (command == "spectrum" || command == "qr" || command == "quantize" || command == "partition") j["order"] = p.order;
  if (command == "spectrum") j["q_grid"] = p.q_grid;
  if (command == "quantize") {
    j["n_list"] = p.n_list;
    j["strategy"] = p.strategy;
    j["grid"] = p.grid;
    j["starts"] = p.starts;
    j["eval_depth"] = p.eval_depth;
  }
  if (command == "partition") {
    j["budget"] = p.budget;
    j["x"] = p.x;
    j["alphas"] = p.alphas;
    j["levels"] = p.levels;
  }
  if (command == "verify") j["suite"] = p.suite;
  return j;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_spectrum(const Global& g, const Params& p) {
  const auto spec = load_spec(g);
  prepare_out(g);
  write_json(g, "run.json", config_json("spectrum", g, p, spec));
  const auto m = build_measure(spec, g.depth);
  const SpectrumContext ctx(m);
  const auto grid = parse_grid(p.q_grid);
  const auto beta = spectrum_curve(ctx, SpectrumKind::Beta, p.order, grid);
  const auto tau = spectrum_curve(ctx, SpectrumKind::TauJ, p.order, grid);
  io::write_file(out_path(g, "beta.csv"), io::spectrum_csv(beta));
  io::write_file(out_path(g, "tau.csv"), io::spectrum_csv(tau));

  json markers;
  markers["r"] = p.order;
  markers["dim_M"] = ctx.beta_hat(0.0).value;
  markers["dim_inf"] = ctx.dim_inf().value;
  int code = 0;
  double q_r = 1.0;
  try {
    const auto c = ctx.critical_q(p.order);
    markers["critical"] = io::critical_json(c);
    q_r = c.q_r;
  } catch (const Error& e) {
    markers["critical"] = {{"error", e.what()}};
    code = static_cast<int>(e.code());
  }
  const auto d0 = d_zero(ctx);
  markers["D_0"] = d0.value;
  markers["D_0_half_step"] = d0.half_step_value;
  markers["D_0_non_differentiable"] = d0.non_differentiable;
  json all;
  all["beta"] = io::spectrum_json(beta);
  all["tau"] = io::spectrum_json(tau);
  all["markers"] = markers;
  write_json(g, "spectrum.json", all);
  write_json(g, "markers.json", markers);
  io::write_file(out_path(g, "spectrum.gp"), io::spectrum_gnuplot("beta.csv", p.order, q_r, d0.value));
  std::cout << markers.dump(2) << "\n";
  return code;
}

int cmd_qr(const Global& g, const Params& p) {
  const auto spec = load_spec(g);
  prepare_out(g);
  write_json(g, "run.json", config_json("qr", g, p, spec));
  const auto m = build_measure(spec, g.depth);
  const auto c = critical_q(m, p.order);
  const json j = io::critical_json(c);
  write_json(g, "qr.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

IntegrationTarget make_target(const MeasureSpec& spec, const Global& g, std::optional<DyadicMeasure>& tree) {
  if (const auto* d = std::get_if<DensitySpec>(&spec.variant); d && spec.dim == 1) {
    if (!d->name.empty() && d->pieces.empty()) return density_target(d->name);
    return DensityTarget{"custom", resolve_density(*d)};
  }
  if (const auto* a = std::get_if<AtomicSpec>(&spec.variant)) return PointTarget::from_atoms(*a, spec.dim);
  tree = build_measure(spec, g.depth);
  return PointTarget::from_measure(*tree, g.depth);
}

int cmd_quantize(const Global& g, const Params& p) {
  const auto spec = load_spec(g);
  prepare_out(g);
  write_json(g, "run.json", config_json("quantize", g, p, spec));
  std::optional<DyadicMeasure> tree;
  const IntegrationTarget target = make_target(spec, g, tree);
  std::optional<PointTarget> evaluation;
  if (p.eval_depth > 0) {
    if (!tree) throw SpecError("--eval-depth applies to measure-mode targets only");
    if (p.eval_depth < g.depth) throw SpecError("--eval-depth must be >= --depth");
    tree = build_measure(spec, p.eval_depth);
    evaluation = PointTarget::from_measure(*tree, p.eval_depth);
  }
  ErrorCurveOptions o;
  o.optimize.grid = p.grid;
  o.optimize.starts = p.starts;
  o.optimize.norm = parse_norm(g.norm);
  if (evaluation) o.evaluation = &*evaluation;
  const auto ns = parse_int_list(p.n_list);
  const auto curve = error_curve(target, p.order, ns, parse_strategy(p.strategy), g.seed, o);
  const json j = io::error_curve_json(curve);
  write_json(g, "error_curve.json", j);
  if (curve.divergent) {
    json report;
    report["divergent"] = true;
    report["r"] = p.order;
    report["e"] = 0.0;
    report["reason"] = "integral of d(x,A)^r is infinite: e_{n,r} = 0 for every n";
    report["quantizer"] = io::quantizer_json(curve.quantizers.back());
    write_json(g, "divergence.json", report);
    std::cout << report.dump(2) << "\n";
    return static_cast<int>(ExitCode::Divergence);
  }
  io::write_file(out_path(g, "error_curve.csv"), io::error_curve_csv(curve));
  json summary = j["fit"];
  summary["points"] = curve.points.size();
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_partition(const Global& g, const Params& p) {
  const auto spec = load_spec(g);
  prepare_out(g);
  write_json(g, "run.json", config_json("partition", g, p, spec));
  const auto m = build_measure(spec, g.depth);
  const JTable jt(m, p.order);
  json summary;
  if (p.budget > 0) {
    const auto part = greedy_partition(m, jt, p.budget);
    write_json(g, "partition.json", io::partition_json(part));
    io::write_file(out_path(g, "partition.csv"), io::partition_csv(part));
    summary["budget"] = p.budget;
    summary["gamma"] = part.max_j;
    summary["cardinality"] = part.cardinality;
    summary["depth_limited"] = part.depth_limited;
  }
  if (p.x > 0.0) {
    const auto e = partition_entropy(m, jt, p.x);
    write_json(g, "entropy_partition.json", io::partition_json(e.partition));
    summary["x"] = p.x;
    summary["M"] = e.m;
  }
  if (!p.alphas.empty()) {
    const auto alphas = parse_grid(p.alphas);
    const int levels = p.levels.empty() ? g.depth : static_cast<int>(to_double(p.levels));
    const auto cd = optimized_coarse_dimension(jt, alphas, levels);
    std::string csv;
    for (const auto& c : cd.per_alpha) csv += io::counts_csv(c);
    io::write_file(out_path(g, "counts.csv"), csv);
    summary["F_upper"] = cd.f_upper;
    summary["F_lower"] = cd.f_lower;
    summary["argmax_upper"] = cd.argmax_upper;
    summary["argmax_lower"] = cd.argmax_lower;
  }
  if (summary.empty()) throw SpecError("partition needs --budget, --x or --alphas");
  write_json(g, "partition_summary.json", summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

json density_metadata(const oracles::RegisteredDensity& d) {
  json j;
  j["name"] = d.name;
  j["description"] = d.description;
  j["s_h"] = io::jnum(d.s_h);
  j["dim_infty"] = d.dim_infty;
  j["singular_points"] = d.singular_points;
  j["norm_at_s_h_finite"] = d.norm_at_s_h_finite;
  j["notes"] = d.notes;
  return j;
}

int cmd_oracles(const Params& p) {
  if (p.oracle_action == "list") {
    json j = json::array();
    for (const auto& n : oracles::registered_names()) j.push_back(density_metadata(oracles::example_density(n)));
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  json j;
  j["op"] = p.oracle_op;
  if (p.oracle_op == "uniform_midpoint") {
    j["n"] = p.oracle_n;
    j["r"] = p.order;
    j["value"] = oracles::uniform_midpoint_error(p.oracle_n, p.order);
  } else if (p.oracle_op == "cascade_beta" || p.oracle_op == "cascade_q_r") {
    const auto probs = parse_grid(p.probabilities);
    j["p"] = probs;
    if (p.oracle_op == "cascade_beta") {
      j["q"] = p.q;
      j["value"] = oracles::cascade_beta(probs, p.q);
    } else {
      j["r"] = p.order;
      j["value"] = oracles::cascade_critical_q(probs, p.order);
    }
  } else {
    const auto known = oracles::registered_names();
    if (std::find(known.begin(), known.end(), p.oracle_name) == known.end())
      throw LookupError("no registered density '" + p.oracle_name + "'");
    j["name"] = p.oracle_name;
    if (p.oracle_op == "metadata") {
      j["value"] = density_metadata(oracles::example_density(p.oracle_name));
    } else if (p.oracle_op == "s_norm") {
      const auto nrm = oracles::s_norm(p.oracle_name, p.s);
      j["s"] = p.s;
      j["value"] = io::jnum(nrm.divergent ? kInfinity : nrm.value);
      j["divergent"] = nrm.divergent;
    } else if (p.oracle_op == "phi") {
      const auto phi = phi_r(p.oracle_name, p.order);
      j["r"] = p.order;
      j["value"] = io::jnum(phi.value);
      j["norm_divergent"] = phi.norm_divergent;
    } else if (p.oracle_op == "phi_zero") {
      const auto z = oracles::phi_zero_reference(p.oracle_name);
      j["value"] = z.value;
      j["divergent"] = z.divergent;
    } else {
      throw SpecError("unknown oracle op '" + p.oracle_op + "'");
    }
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_verify(const Global& g, const Params& p) {
  namespace acc = acceptance;
  if (p.list) {
    for (const auto& c : acc::criteria()) std::printf("%-4s %-10s %s\n", c.id.c_str(), c.suite.c_str(), c.title.c_str());
    return 0;
  }
  const auto selected = acc::select(p.suite);
  std::vector<acc::CriterionResult> results;
  for (const auto& c : selected) {
    results.push_back(acc::run(c));
    std::printf("%s\n", acc::line(results.back()).c_str());
    std::fflush(stdout);
  }
  prepare_out(g);
  const json report = acc::report_json(results);
  write_json(g, "verify.json", report);
  return report["all_passed"].get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantdim: quantization dimensions of dyadic measures"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  Params p;
  app.add_option("--spec", g.spec_file, "measure spec JSON file");
  app.add_option("--inline", g.inline_spec, "measure spec as inline JSON");
  app.add_option("--depth", g.depth, "truncation depth of the measure tree")->check(CLI::Range(1, 62));
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--norm", g.norm, "euclid or max")->check(CLI::IsMember({"euclid", "max"}));

  auto* spectrum = app.add_subcommand("spectrum", "beta and tau curves with q_r, D_r, D_0 markers");
  spectrum->add_option("--order", p.order, "quantization order r");
  spectrum->add_option("--q-grid", p.q_grid, "q grid, lo:hi:step or comma list");

  auto* qr = app.add_subcommand("qr", "critical exponent q_r and D_r");
  qr->add_option("--order", p.order, "quantization order r");

  auto* quantize = app.add_subcommand("quantize", "optimal codebooks and the error curve");
  quantize->add_option("--order", p.order, "quantization order r");
  quantize->add_option("--n-list", p.n_list, "codebook sizes: a:b, a:b:step, a:b:xk or comma list");
  quantize->add_option("--strategy", p.strategy, "dp1d, lloyd or exhaustive")
      ->check(CLI::IsMember({"dp1d", "lloyd", "exhaustive"}));
  quantize->add_option("--grid", p.grid, "candidate grid resolution 2^-G")->check(CLI::Range(1, 30));
  quantize->add_option("--starts", p.starts, "Lloyd multistart count")->check(CLI::Range(1, 1000));
  quantize->add_option("--eval-depth", p.eval_depth, "measure mode: evaluate errors at this depth");

  auto* partition = app.add_subcommand("partition", "greedy dyadic partitions and coarse counts");
  partition->add_option("--order", p.order, "quantization order r");
  partition->add_option("--budget", p.budget, "cardinality budget for gamma");
  partition->add_option("--x", p.x, "threshold x for the partition entropy M(x)");
  partition->add_option("--alphas", p.alphas, "alpha grid for coarse counts, lo:hi:step");
  partition->add_option("--levels", p.levels, "levels used for coarse counts (default depth)");

  auto* oracles_cmd = app.add_subcommand("oracles", "closed-form references and registered densities");
  oracles_cmd->add_option("action", p.oracle_action, "list or eval")->check(CLI::IsMember({"list", "eval"}));
  oracles_cmd->add_option("--name", p.oracle_name, "registered density name");
  oracles_cmd->add_option("--op", p.oracle_op, "metadata, s_norm, phi, phi_zero, uniform_midpoint, cascade_beta, cascade_q_r")
      ->check(CLI::IsMember({"metadata", "s_norm", "phi", "phi_zero", "uniform_midpoint", "cascade_beta", "cascade_q_r"}));
  oracles_cmd->add_option("--s", p.s, "exponent s for ||h||_s");
  oracles_cmd->add_option("--order", p.order, "order r");
  oracles_cmd->add_option("--n", p.oracle_n, "codebook size for uniform_midpoint")->check(CLI::PositiveNumber);
  oracles_cmd->add_option("--q", p.q, "exponent q for cascade_beta");
  oracles_cmd->add_option("--p", p.probabilities, "cascade probabilities, comma list");

  auto* verify = app.add_subcommand("verify", "acceptance criteria");
  verify->add_option("--suite", p.suite, "suite name, criterion id or all");
  verify->add_flag("--list", p.list, "list criterion ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::Config);
  }

  try {
    if (*spectrum) return cmd_spectrum(g, p);
    if (*qr) return cmd_qr(g, p);
    if (*quantize) return cmd_quantize(g, p);
    if (*partition) return cmd_partition(g, p);
    if (*oracles_cmd) return cmd_oracles(p);
    if (*verify) return cmd_verify(g, p);
  } catch (const Error& e) {
    std::cerr << "quantdim: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "quantdim: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Config);
  }
  return static_cast<int>(ExitCode::Config);
}
