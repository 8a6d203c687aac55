#include "folia/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "folia/diagnostics.hpp"
#include "folia/errors.hpp"
#include "folia/manifest_io.hpp"
#include "folia/tester.hpp"

namespace folia {

using nlohmann::json;

namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

}  // namespace

BuildConfig build_config_from_json(const json& j) {
  try {
    if (!j.is_object()) throw DomainError("config must be a JSON object");
    const json& jd = j.at("domain");
    const int n = jd.at("n").get<int>();
    if (n < 1) throw DomainError("n must be >= 1");
    const DomainKind kind = domain_kind_from_string(jd.at("kind").get<std::string>());
    std::vector<double> radii;
    if (jd.contains("radii")) {
      radii = jd.at("radii").get<std::vector<double>>();
    } else {
      const std::size_t count = kind == DomainKind::Box ? 2 * n : (kind == DomainKind::Polydisc ? n : 1);
      radii.assign(count, 1.0);
    }
    Point center = jd.contains("center") ? Point(jd.at("center").get<std::vector<double>>()) : Point::zero(n);
    BuildConfig c{Domain(kind, n, std::move(center), std::move(radii)), params_from_json(j)};
    if (!j.contains("seed")) throw DomainError("config needs a seed");
    return c;
  } catch (const json::exception& e) {
    throw DomainError(std::string("invalid config: ") + e.what());
  }
}

json build_config_to_json(const BuildConfig& c) {
  json j = params_to_json(c.params);
  j["domain"] = domain_to_json(c.domain);
  return j;
}

int cmd_build(const std::filesystem::path& config, const std::filesystem::path& out, const BuildOverrides& overrides,
              std::ostream& log, std::ostream& err) {
  BuildConfig cfg = build_config_from_json(read_json_file(config));
  if (overrides.stages) cfg.params.stages = *overrides.stages;
  if (overrides.seed) cfg.params.seed = *overrides.seed;
  if (overrides.resolution) cfg.params.resolution = *overrides.resolution;
  if (overrides.flow_steps) cfg.params.flow_steps = *overrides.flow_steps;
  if (overrides.k_bend) cfg.params.k_bend = *overrides.k_bend;
  if (cfg.params.stages < 1) {
    err << "usage error: the stage count K must be >= 1\n";
    return exit_code::kUsage;
  }

  const FoliationManifest m = build_foliation(cfg.domain, cfg.params);
  save_manifest(m, out);

  log << std::setw(5) << "k" << std::setw(4) << "l" << std::setw(15) << "eps_k" << std::setw(15) << "l_k"
      << std::setw(15) << "bound" << "\n";
  for (std::size_t k = 0; k < m.stages.size(); ++k) {
    log << std::setw(5) << k + 1 << std::setw(4) << m.stages[k].l() << std::setw(15) << sci(m.stages[k].epsilon())
        << std::setw(15) << sci(m.separation_bounds[k + 1]) << std::setw(15) << sci(2.0 * m.stages[k].epsilon())
        << "\n";
  }
  log << "wrote " << out.string() << " (" << m.stages.size() << " stages, K_bend " << sci(m.k_bend) << ")\n";
  return exit_code::kOk;
}

std::vector<Point> read_anchor_file(const std::filesystem::path& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<Point> anchors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first) || first.front() == '#') continue;
    ls.clear();
    ls.seekg(0);
    std::vector<double> coords;
    double v = 0.0;
    while (ls >> v) coords.push_back(v);
    if (!ls.eof() || coords.size() != static_cast<std::size_t>(2 * n)) {
      throw DomainError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(2 * n) +
                        " numbers");
    }
    anchors.emplace_back(std::move(coords));
  }
  return anchors;
}

std::vector<Point> grid_anchors(const Domain& d, const std::string& spec) {
  const auto [lo, hi] = d.bounding_box();
  const std::size_t dim = lo.size();
  const std::size_t transverse = dim - 1;
  std::vector<Point> anchors;
  if (spec.find('x') == std::string::npos) {
    std::size_t count = 0;
    try {
      std::size_t used = 0;
      count = std::stoul(spec, &used);
      if (used != spec.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DomainError("invalid grid spec '" + spec + "'");
    }
    if (count == 0) throw DomainError("grid spec must request at least one anchor");
    const std::vector<unsigned> primes = first_primes(transverse);
    Point p = d.center();
    for (std::uint64_t index = 1; anchors.size() < count; ++index) {
      if (index > 1000 * count + 1000) throw DomainError("grid sampler exhausted");
      for (std::size_t i = 0; i < transverse; ++i) {
        p[i + 1] = lo[i + 1] + (hi[i + 1] - lo[i + 1]) * radical_inverse(primes[i], index);
      }
      if (d.contains_interior(p)) anchors.push_back(p);
    }
    return anchors;
  }
  std::vector<std::size_t> counts;
  std::istringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      std::size_t used = 0;
      counts.push_back(std::stoul(part, &used));
      if (used != part.size() || counts.back() == 0) throw std::invalid_argument("bad");
    } catch (const std::exception&) {
      throw DomainError("invalid grid spec '" + spec + "'");
    }
  }
  if (counts.size() != transverse) {
    throw DomainError("grid spec needs " + std::to_string(transverse) + " counts separated by 'x'");
  }
  std::vector<std::size_t> idx(transverse, 0);
  for (;;) {
    Point p = d.center();
    for (std::size_t i = 0; i < transverse; ++i) {
      // Cell midpoints keep every lattice point off the bounding box.
      p[i + 1] = lo[i + 1] + (hi[i + 1] - lo[i + 1]) * (static_cast<double>(idx[i]) + 0.5) / counts[i];
    }
    if (d.contains_interior(p)) anchors.push_back(p);
    std::size_t i = 0;
    while (i < transverse && ++idx[i] == counts[i]) idx[i++] = 0;
    if (i == transverse) break;
  }
  return anchors;
}

int cmd_leaves(const std::filesystem::path& manifest, const std::optional<std::filesystem::path>& anchors,
               const std::optional<std::string>& grid, const std::filesystem::path& out_dir, std::ostream& log,
               std::ostream& err) {
  if (anchors.has_value() == grid.has_value()) {
    err << "usage error: give exactly one of --anchors and --grid\n";
    return exit_code::kUsage;
  }
  const FoliationManifest m = load_manifest(manifest);
  const std::vector<Point> points = anchors ? read_anchor_file(*anchors, m.n()) : grid_anchors(m.domain, *grid);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!m.domain.contains_interior(points[i])) {
      throw DomainError("anchor " + std::to_string(i + 1) + " lies outside the domain");
    }
  }
  std::filesystem::create_directories(out_dir);
  std::size_t marked = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const LeafCurve leaf = leaf_of_base(m, points[i]);
    if (leaf.marked_stage) ++marked;
    char name[32];
    std::snprintf(name, sizeof name, "leaf_%04zu.csv", i + 1);
    write_file_atomic(out_dir / name, leaf_csv(leaf));
  }
  log << "wrote " << points.size() << " leaves to " << out_dir.string() << " (" << marked << " marked)\n";
  return exit_code::kOk;
}

int cmd_test(const std::filesystem::path& manifest, const std::string& function, const std::filesystem::path& report,
             bool oracle, std::ostream& log, std::ostream& err) {
  const Expr f = Expr::parse(function);
  const FoliationManifest m = load_manifest(manifest);
  if (f.max_variable() > m.n()) {
    err << "error: z" << f.max_variable() << " exceeds the manifest dimension n = " << m.n() << "\n";
    return exit_code::kUsage;
  }
  TestOptions opts;
  opts.oracle = oracle;
  const HolomorphyReport r = test_function(f, m, opts);
  write_file_atomic(report, report_to_json(r, manifest.string()).dump(2) + "\n");

  log << "function " << r.function << " at " << r.points.size() << " angular points\n";
  for (std::size_t l = 0; l < r.per_coordinate_max.size(); ++l) {
    log << "  max |d/dconj(z" << l + 1 << ")| = " << sci(r.per_coordinate_max[l]) << "\n";
  }
  if (oracle) log << "  oracle agreement: " << (r.oracle_agreement ? "yes" : "NO") << "\n";
  log << "verdict: " << to_string(r.verdict) << "\n";
  switch (r.verdict) {
    case Verdict::Consistent:
      return exit_code::kOk;
    case Verdict::Violated:
      return exit_code::kViolated;
    case Verdict::Inconclusive:
      return exit_code::kInconclusive;
  }
  return exit_code::kInconclusive;
}

int cmd_verify(const std::filesystem::path& manifest, const std::string& level, std::ostream& log, std::ostream& err) {
  const VerifyLevel lv = verify_level_from_string(level);
  const FoliationManifest m = load_manifest(manifest);
  const std::vector<CheckResult> results = run_verify(m, lv);
  bool ok = true;
  for (const CheckResult& r : results) {
    log << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(24) << r.name << std::right
        << " value=" << sci(r.value) << " limit=" << sci(r.tolerance) << "  " << r.detail << "\n";
    ok = ok && r.passed;
  }
  if (!ok) {
    err << "verify: invariant failure\n";
    return exit_code::kInvariant;
  }
  log << "verify (" << level << "): all " << results.size() << " checks passed\n";
  return exit_code::kOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"folia: build and probe a dense-corner foliation of a domain in C^n"};
  app.require_subcommand(1);

  std::string config, out, manifest, anchors, grid, out_dir, function, report, level = "quick";
  bool oracle = false;
  BuildOverrides ov;
  int stages = 0;
  std::uint64_t seed = 0;
  double resolution = 0.0, k_bend = 0.0;
  int flow_steps = 0;

  CLI::App* build = app.add_subcommand("build", "run the construction and write a manifest");
  build->add_option("--config", config, "build config JSON")->required();
  build->add_option("--out", out, "manifest output path")->required();
  CLI::Option* o_stages = build->add_option("--stages", stages, "override the stage count K");
  CLI::Option* o_seed = build->add_option("--seed", seed, "override the seed");
  CLI::Option* o_res = build->add_option("--resolution", resolution, "override the radius cap");
  CLI::Option* o_steps = build->add_option("--flow-steps", flow_steps, "override the RK4 step count");
  CLI::Option* o_k = build->add_option("--k-bend", k_bend, "override the bend slope K");

  CLI::App* leaves = app.add_subcommand("leaves", "export leaf polylines as CSV");
  leaves->add_option("--manifest", manifest)->required();
  CLI::Option* o_anchors = leaves->add_option("--anchors", anchors, "file of base anchors");
  CLI::Option* o_grid = leaves->add_option("--grid", grid, "N or a1x..xa(2n-1)");
  o_anchors->excludes(o_grid);
  leaves->add_option("--out-dir", out_dir)->required();

  CLI::App* test = app.add_subcommand("test", "test a function for holomorphy at the angular points");
  test->add_option("--manifest", manifest)->required();
  test->add_option("--function", function, "expression in z1..zn")->required();
  test->add_option("--report", report, "report JSON path")->required();
  test->add_flag("--oracle", oracle, "cross-check against automatic differentiation");

  CLI::App* verify = app.add_subcommand("verify", "run the invariant suites on a manifest");
  verify->add_option("--manifest", manifest)->required();
  verify->add_option("--level", level)->check(CLI::IsMember({"quick", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, log, err);
    return code == 0 ? exit_code::kOk : exit_code::kUsage;
  }

  try {
    if (*build) {
      if (*o_stages) ov.stages = stages;
      if (*o_seed) ov.seed = seed;
      if (*o_res) ov.resolution = resolution;
      if (*o_steps) ov.flow_steps = flow_steps;
      if (*o_k) ov.k_bend = k_bend;
      return cmd_build(config, out, ov, log, err);
    }
    if (*leaves) {
      return cmd_leaves(manifest, *o_anchors ? std::optional<std::filesystem::path>(anchors) : std::nullopt,
                        *o_grid ? std::optional<std::string>(grid) : std::nullopt, out_dir, log, err);
    }
    if (*test) return cmd_test(manifest, function, report, oracle, log, err);
    if (*verify) return cmd_verify(manifest, level, log, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kParse;
  } catch (const InvariantViolation& e) {
    err << "invariant failure (" << e.condition() << "): " << e.what() << "\n";
    return exit_code::kInvariant;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kUsage;
  }
  return exit_code::kUsage;
}

}  // namespace folia
