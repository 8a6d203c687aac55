#include "folia/manifest_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace folia {

using nlohmann::json;

namespace {

json point_to_json(const Point& p) { return json(p.vec()); }

Point point_from_json(const json& j) { return Point(j.get<std::vector<double>>()); }

void require(bool cond, const std::string& what) {
  if (!cond) throw std::runtime_error("malformed manifest: " + what);
}

}  // namespace

json domain_to_json(const Domain& d) {
  return json{{"kind", to_string(d.kind())}, {"n", d.n()}, {"center", point_to_json(d.center())}, {"radii", d.radii()}};
}

Domain domain_from_json(const json& j) {
  const DomainKind kind = domain_kind_from_string(j.at("kind").get<std::string>());
  const int n = j.at("n").get<int>();
  Point center = j.contains("center") ? point_from_json(j.at("center")) : Point::zero(n);
  return Domain(kind, n, std::move(center), j.at("radii").get<std::vector<double>>());
}

json stage_to_json(const Stage& s) {
  const StageParams& p = s.params();
  return json{{"center", point_to_json(p.center)},
              {"epsilon", p.epsilon},
              {"delta", p.delta},
              {"eta", p.eta},
              {"k_bend", p.k_bend},
              {"l", p.l},
              {"flow_steps", p.flow_steps},
              {"frame", p.frame.matrix},
              {"frame_inverse", p.frame.inverse}};
}

Stage stage_from_json(const json& j) {
  StageParams p;
  p.center = point_from_json(j.at("center"));
  p.epsilon = j.at("epsilon").get<double>();
  p.delta = j.at("delta").get<double>();
  p.eta = j.at("eta").get<double>();
  p.k_bend = j.at("k_bend").get<double>();
  p.l = j.at("l").get<int>();
  p.flow_steps = j.value("flow_steps", kDefaultFlowSteps);
  p.frame.m = static_cast<int>(p.center.size());
  p.frame.matrix = j.at("frame").get<std::vector<double>>();
  p.frame.inverse = j.at("frame_inverse").get<std::vector<double>>();
  return Stage(std::move(p));
}

json params_to_json(const BuildParams& p) {
  json j{{"stages", p.stages},         {"seed", p.seed},           {"resolution", p.resolution},
         {"flow_steps", p.flow_steps}, {"candidates", p.candidates}, {"max_draws", p.max_draws}};
  j["k_bend"] = p.k_bend ? json(*p.k_bend) : json(nullptr);
  return j;
}

BuildParams params_from_json(const json& j, BuildParams base) {
  if (j.contains("stages")) base.stages = j.at("stages").get<int>();
  if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("resolution")) base.resolution = j.at("resolution").get<double>();
  if (j.contains("flow_steps")) base.flow_steps = j.at("flow_steps").get<int>();
  if (j.contains("candidates")) base.candidates = j.at("candidates").get<int>();
  if (j.contains("max_draws")) base.max_draws = j.at("max_draws").get<int>();
  if (j.contains("k_bend") && !j.at("k_bend").is_null()) base.k_bend = j.at("k_bend").get<double>();
  return base;
}

json manifest_to_json(const FoliationManifest& m) {
  json stages = json::array();
  for (const Stage& s : m.stages) stages.push_back(stage_to_json(s));
  json centers = json::array();
  for (const Point& c : m.centers) centers.push_back(point_to_json(c));
  json j;
  j["version"] = kManifestVersion;
  j["domain"] = domain_to_json(m.domain);
  j["n"] = m.n();
  j["params"] = params_to_json(m.params);
  j["seed"] = m.params.seed;
  j["k_bend"] = m.k_bend;
  j["provenance"] = json{{"generator", "folia"},
                         {"separation_scale", "1/(s+2)"},
                         {"separation_scale_alt", "1/(s+1)"},
                         {"flow_log_norm_bound", kFlowLogNormBound},
                         {"bend_lower_lipschitz", kBendLowerLipschitz},
                         {"psi_lipschitz_target", kPsiLipschitzTarget},
                         {"epsilon_safety", 0.9}};
  j["stages"] = std::move(stages);
  j["centers"] = std::move(centers);
  j["separation_bounds"] = m.separation_bounds;
  j["separation_bounds_alt"] = m.separation_bounds_alt;
  j["lipschitz_floor"] = m.lipschitz_floor;
  return j;
}

FoliationManifest manifest_from_json(const json& j) {
  require(j.value("version", std::string{}) == kManifestVersion, "unsupported version");
  FoliationManifest m{domain_from_json(j.at("domain")), params_from_json(j.at("params")), j.at("k_bend").get<double>(),
                      {}, {}, {}, {}, {}};
  require(j.value("n", m.n()) == m.n(), "n disagrees with the domain");
  for (const json& s : j.at("stages")) m.stages.push_back(stage_from_json(s));
  for (const json& c : j.at("centers")) m.centers.push_back(point_from_json(c));
  m.separation_bounds = j.at("separation_bounds").get<std::vector<double>>();
  m.separation_bounds_alt = j.at("separation_bounds_alt").get<std::vector<double>>();
  m.lipschitz_floor = j.at("lipschitz_floor").get<std::vector<double>>();
  const std::size_t k = m.stages.size();
  require(m.centers.size() == k, "centre count differs from stage count");
  require(m.separation_bounds.size() == k + 1 && m.separation_bounds_alt.size() == k + 1 &&
              m.lipschitz_floor.size() == k + 1,
          "bound arrays must have K+1 entries");
  for (const Stage& s : m.stages) {
    require(s.center().size() == static_cast<std::size_t>(m.domain.real_dim()), "stage dimension mismatch");
  }
  return m;
}

std::string manifest_text(const FoliationManifest& m) { return manifest_to_json(m).dump(2) + "\n"; }

void save_manifest(const FoliationManifest& m, const std::filesystem::path& path) {
  write_file_atomic(path, manifest_text(m));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

FoliationManifest load_manifest(const std::filesystem::path& path) { return manifest_from_json(read_json_file(path)); }

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string leaf_csv(const LeafCurve& leaf) {
  std::ostringstream out;
  out << "t";
  const std::size_t m = leaf.base.anchor.size();
  for (std::size_t i = 1; i <= m; ++i) out << ",x_" << i;
  out << "\n";
  for (std::size_t k = 0; k < leaf.samples.size(); ++k) {
    out << format_double(leaf.t[k]);
    for (double c : leaf.samples[k].coords()) out << ',' << format_double(c);
    out << "\n";
  }
  return out.str();
}

}  // namespace folia
