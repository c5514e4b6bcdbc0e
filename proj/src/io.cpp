#include "utree/io.hpp"

#include <fstream>
#include <sstream>

#include "utree/errors.hpp"

namespace utree {

namespace {

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  return j.at(key);
}

Json rule_to_json(const LocalRule& r) {
  Json q = Json::array();
  for (const auto& x : r.q) q.push_back(to_json(x));
  Json w = Json::array();
  for (const auto& x : r.w) w.push_back(to_json(x));
  return Json{{"q", q}, {"w", w}};
}

LocalRule rule_from_json(const Json& j, const std::string& where) {
  std::vector<Rational> q;
  for (const auto& x : field(j, "q")) q.push_back(rational_from_json(x));
  std::vector<CRational> w;
  if (j.contains("w") && !j.at("w").is_null()) {
    for (const auto& x : j.at("w")) w.push_back(complex_from_json(x));
  } else {
    for (const auto& x : q) w.emplace_back(x);
  }
  return LocalRule::make(std::move(q), std::move(w), where);
}

std::vector<LocalRule> phases_from_json(const Json& j) {
  std::vector<LocalRule> out;
  for (std::size_t d = 0; d < j.size(); ++d)
    out.push_back(rule_from_json(j.at(d), VertexId(std::vector<std::uint32_t>(d, 0)).to_string()));
  return out;
}

}  // namespace

Json to_json(const Rational& r) { return format_rational(r); }

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(Integer(std::to_string(j.get<long long>())));
  throw ParseError("rational expected as a \"num/den\" string, got " + j.dump());
}

Json to_json(const CRational& c) { return Json::array({to_json(c.re), to_json(c.im)}); }

CRational complex_from_json(const Json& j) {
  if (j.is_array()) {
    if (j.size() != 2) throw ParseError("complex value needs [re, im], got " + j.dump());
    return CRational(rational_from_json(j[0]), rational_from_json(j[1]));
  }
  return CRational(rational_from_json(j));
}

Json to_json(const Value& v) {
  Json out = Json::array();
  if (v.mode() == Mode::exact) {
    for (const auto& c : v.exact()) out.push_back(to_json(c));
  } else {
    for (const auto& c : v.approx()) out.push_back(Json::array({c.real(), c.imag()}));
  }
  return out;
}

Value value_from_json(const Json& j, std::size_t m, Mode mode) {
  if (!j.is_array()) throw ParseError("value must be an array, got " + j.dump());
  Json coords = j;
  if (m == 1 && j.size() == 2 && !j[0].is_array()) coords = Json::array({j});
  if (coords.size() != m)
    throw ParseError("value has " + std::to_string(coords.size()) + " coordinates, expected " +
                     std::to_string(m));
  if (mode == Mode::exact) {
    std::vector<CRational> out;
    for (const auto& c : coords) out.push_back(complex_from_json(c));
    return Value(std::move(out));
  }
  std::vector<std::complex<double>> out;
  for (const auto& c : coords) {
    if (!c.is_array() || c.size() != 2) throw ParseError("float coordinate needs [re, im]");
    auto part = [](const Json& x) {
      if (x.is_number()) return x.get<double>();
      return to_double(rational_from_json(x));
    };
    out.emplace_back(part(c[0]), part(c[1]));
  }
  return Value(std::move(out));
}

Json to_json(const TreeConfig& config) {
  Json out;
  out["depth_cap"] = config.depth_cap();
  switch (config.kind()) {
    case RuleKind::uniform: {
      Json r = rule_to_json(config.phases().front());
      out["rule"] = Json{{"kind", "uniform"}};
      out["q"] = r["q"];
      out["w"] = r["w"];
      break;
    }
    case RuleKind::periodic:
    case RuleKind::explicit_prefix: {
      Json phases = Json::array();
      for (const auto& p : config.phases()) phases.push_back(rule_to_json(p));
      Json rule{{"kind", config.kind() == RuleKind::periodic ? "periodic" : "explicit"},
                {"phases", phases}};
      if (config.kind() == RuleKind::explicit_prefix) {
        Json nodes = Json::array();
        for (const auto& [v, r] : config.explicit_nodes()) {
          Json n = rule_to_json(r);
          n["vertex"] = v.path();
          nodes.push_back(n);
        }
        rule["nodes"] = nodes;
      }
      out["rule"] = rule;
      break;
    }
  }
  return out;
}

TreeConfig tree_from_json(const Json& j) {
  return guarded("tree config", [&] {
    const Json& rule = field(j, "rule");
    const std::string kind = field(rule, "kind").get<std::string>();
    const int cap = field(j, "depth_cap").get<int>();
    if (cap < 0) throw ParseError("depth_cap must be non-negative");
    auto default_phases = [&]() -> std::vector<LocalRule> {
      if (rule.contains("phases")) return phases_from_json(rule.at("phases"));
      return {rule_from_json(j, VertexId().to_string())};
    };
    if (kind == "uniform") return TreeConfig::uniform(rule_from_json(j, VertexId().to_string()), cap);
    if (kind == "periodic") return TreeConfig::periodic(default_phases(), cap);
    if (kind == "explicit") {
      std::map<VertexId, LocalRule> nodes;
      for (const auto& n : field(rule, "nodes")) {
        VertexId v(field(n, "vertex").get<std::vector<std::uint32_t>>());
        nodes.emplace(v, rule_from_json(n, v.to_string()));
      }
      return TreeConfig::explicit_prefix(std::move(nodes), default_phases(), cap);
    }
    throw ParseError("unknown rule kind '" + kind + "'");
  });
}

Json to_json(const SimpleFunction& f) {
  Json values = Json::array();
  for (const auto& v : f.values) values.push_back(to_json(v));
  return Json{{"level", f.level}, {"m", f.dim()}, {"mode", mode_name(f.mode())}, {"values", values}};
}

SimpleFunction simple_from_json(const Json& j) {
  return guarded("simple function", [&] {
    SimpleFunction f;
    f.level = field(j, "level").get<int>();
    const auto m = field(j, "m").get<std::size_t>();
    const Mode mode = j.contains("mode") ? parse_mode(j.at("mode").get<std::string>()) : Mode::exact;
    for (const auto& v : field(j, "values")) f.values.push_back(value_from_json(v, m, mode));
    return f;
  });
}

Json to_json(const HarmonicTruncation& f) {
  Json values = Json::array();
  for (const auto& v : f.values) values.push_back(to_json(v));
  return Json{{"depth", f.depth}, {"m", f.m}, {"mode", mode_name(f.mode)}, {"values", values}};
}

HarmonicTruncation harmonic_from_json(const Json& j) {
  return guarded("harmonic truncation", [&] {
    HarmonicTruncation f;
    f.depth = field(j, "depth").get<int>();
    f.m = field(j, "m").get<std::size_t>();
    f.mode = parse_mode(field(j, "mode").get<std::string>());
    for (const auto& v : field(j, "values")) f.values.push_back(value_from_json(v, f.m, f.mode));
    return f;
  });
}

Json to_json(const Target& t) { return Json{{"label", t.label}, {"function", to_json(t.h)}}; }

Target target_from_json(const Json& j) {
  return guarded("target", [&] {
    Target t;
    t.label = j.contains("label") ? j.at("label").get<std::string>() : "";
    t.h = simple_from_json(field(j, "function"));
    return t;
  });
}

Json to_json(const std::vector<Target>& targets) {
  Json out = Json::array();
  for (const auto& t : targets) out.push_back(to_json(t));
  return out;
}

std::vector<Target> targets_from_json(const Json& j) {
  const Json& list = j.is_object() ? field(j, "targets") : j;
  if (!list.is_array()) throw ParseError("targets must be an array");
  std::vector<Target> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    Target t = target_from_json(list[i]);
    if (t.label.empty()) t.label = "h" + std::to_string(i + 1);
    out.push_back(std::move(t));
  }
  return out;
}

Json to_json(const Schedule& s) {
  Json blocks = Json::array();
  for (const auto& b : s.blocks)
    blocks.push_back(Json{{"target", b.target + 1},
                          {"epsilon", to_json(b.epsilon)},
                          {"transition_start", b.transition_start},
                          {"transition_end", b.transition_end},
                          {"hold_start", b.hold_start},
                          {"hold_end", b.hold_end}});
  return Json{{"horizon", s.horizon}, {"blocks", blocks}};
}

Schedule schedule_from_json(const Json& j) {
  return guarded("schedule", [&] {
    Schedule s;
    s.horizon = field(j, "horizon").get<std::uint64_t>();
    for (const auto& b : field(j, "blocks")) {
      Block blk;
      const auto target = field(b, "target").get<std::size_t>();
      if (target == 0) throw ParseError("block targets are 1-based");
      blk.target = target - 1;
      blk.epsilon = rational_from_json(field(b, "epsilon"));
      blk.transition_start = field(b, "transition_start").get<std::uint64_t>();
      blk.hold_start = field(b, "hold_start").get<std::uint64_t>();
      blk.hold_end = field(b, "hold_end").get<std::uint64_t>();
      blk.transition_end = b.contains("transition_end") ? b.at("transition_end").get<std::uint64_t>()
                                                        : blk.hold_start - 1;
      s.blocks.push_back(blk);
    }
    return s;
  });
}

Json to_json(const IndexSet& s) {
  return Json{{"horizon", s.horizon()}, {"indices", s.indices()}};
}

IndexSet index_set_from_json(const Json& j) {
  return guarded("index set", [&] {
    return IndexSet(field(j, "indices").get<std::vector<std::uint64_t>>(),
                    field(j, "horizon").get<std::uint64_t>());
  });
}

Json to_json(const DensityReport& r) {
  Json profile = Json::array();
  for (const auto& c : r.profile) profile.push_back(Json::array({c.n, c.count}));
  auto point = [](const DensityCheckpoint& c) {
    return Json{{"n", c.n}, {"count", c.count}, {"density", to_json(c.density())}};
  };
  return Json{{"horizon", r.horizon},
              {"window_start", r.window_start},
              {"profile", profile},
              {"finite_horizon_min", point(r.finite_horizon_min)},
              {"finite_horizon_max", point(r.finite_horizon_max)}};
}

DensityReport density_from_json(const Json& j) {
  return guarded("density report", [&] {
    DensityReport r;
    r.horizon = field(j, "horizon").get<std::uint64_t>();
    r.window_start = field(j, "window_start").get<std::uint64_t>();
    for (const auto& p : field(j, "profile"))
      r.profile.push_back(DensityCheckpoint{p.at(0).get<std::uint64_t>(), p.at(1).get<std::uint64_t>()});
    auto point = [](const Json& x) {
      return DensityCheckpoint{field(x, "n").get<std::uint64_t>(), field(x, "count").get<std::uint64_t>()};
    };
    r.finite_horizon_min = point(field(j, "finite_horizon_min"));
    r.finite_horizon_max = point(field(j, "finite_horizon_max"));
    return r;
  });
}

Json to_json(const BuildResult& r) {
  Json log = Json::array();
  for (const auto& rec : r.log) {
    Json e{{"level", rec.level}, {"distance", rec.distance}};
    e["block"] = rec.block ? Json(*rec.block + 1) : Json(nullptr);
    e["unmatched"] = rec.unmatched ? to_json(*rec.unmatched) : Json(nullptr);
    log.push_back(e);
  }
  Json tolerances = Json::array();
  for (const auto& t : r.tolerances) tolerances.push_back(t ? to_json(*t) : Json(nullptr));
  Json visits = Json::array();
  for (const auto& v : r.visits) visits.push_back(to_json(v));
  Json audit{{"levels_checked", r.audit.levels_checked},
             {"classes_checked", r.audit.classes_checked},
             {"max_distance_error", r.audit.max_distance_error},
             {"failure_count", r.audit.failure_count},
             {"failures", r.audit.failures}};
  return Json{{"horizon", r.horizon},     {"anchor_depth", r.anchor_depth},
              {"prefix", to_json(r.prefix)}, {"log", log},
              {"tolerances", tolerances}, {"visits", visits},
              {"audit", audit}};
}

BuildResult build_from_json(const Json& j) {
  return guarded("build result", [&] {
    BuildResult r;
    r.horizon = field(j, "horizon").get<std::uint64_t>();
    r.anchor_depth = field(j, "anchor_depth").get<int>();
    r.prefix = harmonic_from_json(field(j, "prefix"));
    for (const auto& e : field(j, "log")) {
      LevelRecord rec;
      rec.level = field(e, "level").get<std::uint64_t>();
      rec.distance = field(e, "distance").get<std::vector<double>>();
      if (!field(e, "block").is_null()) rec.block = e.at("block").get<std::size_t>() - 1;
      if (!field(e, "unmatched").is_null()) rec.unmatched = rational_from_json(e.at("unmatched"));
      r.log.push_back(std::move(rec));
    }
    for (const auto& t : field(j, "tolerances"))
      r.tolerances.push_back(t.is_null() ? std::nullopt : std::optional<Rational>(rational_from_json(t)));
    for (const auto& v : field(j, "visits")) r.visits.push_back(index_set_from_json(v));
    const Json& a = field(j, "audit");
    r.audit.levels_checked = field(a, "levels_checked").get<std::uint64_t>();
    r.audit.classes_checked = field(a, "classes_checked").get<std::uint64_t>();
    r.audit.max_distance_error = field(a, "max_distance_error").get<double>();
    r.audit.failure_count = field(a, "failure_count").get<std::uint64_t>();
    r.audit.failures = field(a, "failures").get<std::vector<std::string>>();
    return r;
  });
}

Json to_json(const Combo& c) {
  Json out = Json::array();
  for (const auto& a : c.a) out.push_back(to_json(a));
  return out;
}

Combo combo_from_json(const Json& j) {
  return guarded("combo", [&] {
    Combo c;
    for (const auto& a : j) c.a.push_back(complex_from_json(a));
    return c;
  });
}

Json to_json(const CertificateEntry& e) {
  return Json{{"level", e.level},
              {"predicted_bound", e.predicted_bound},
              {"measured_P", e.measured},
              {"target_label", e.target_label},
              {"sound", e.sound}};
}

CertificateEntry certificate_entry_from_json(const Json& j) {
  return guarded("certificate entry", [&] {
    CertificateEntry e;
    e.level = field(j, "level").get<std::uint64_t>();
    e.predicted_bound = field(j, "predicted_bound").get<double>();
    e.measured = field(j, "measured_P").get<double>();
    e.target_label = field(j, "target_label").get<std::string>();
    e.sound = j.contains("sound") ? j.at("sound").get<bool>() : true;
    return e;
  });
}

Json to_json(const SpanCertificate& c) {
  Json entries = Json::array();
  for (const auto& e : c.entries) entries.push_back(to_json(e));
  Json by_target = Json::array();
  for (const auto& s : c.by_target) by_target.push_back(to_json(s));
  return Json{{"combo", to_json(c.combo)},   {"epsilon", to_json(c.epsilon)},
              {"levels", to_json(c.levels)}, {"unsound", c.unsound},
              {"by_target", by_target},      {"entries", entries}};
}

SpanCertificate certificate_from_json(const Json& j) {
  return guarded("certificate", [&] {
    SpanCertificate c;
    c.combo = combo_from_json(field(j, "combo"));
    c.epsilon = rational_from_json(field(j, "epsilon"));
    c.levels = index_set_from_json(field(j, "levels"));
    c.unsound = field(j, "unsound").get<std::size_t>();
    for (const auto& s : field(j, "by_target")) c.by_target.push_back(index_set_from_json(s));
    for (const auto& e : field(j, "entries")) c.entries.push_back(certificate_entry_from_json(e));
    return c;
  });
}

Json to_json(const RunManifest& m) {
  return Json{{"config_path", m.config_path}, {"command", m.command},
              {"parameters", m.parameters},   {"outputs", m.outputs},
              {"seed", m.seed},               {"hashes", m.hashes}};
}

RunManifest manifest_from_json(const Json& j) {
  return guarded("manifest", [&] {
    RunManifest m;
    m.config_path = field(j, "config_path").get<std::string>();
    m.command = field(j, "command").get<std::string>();
    m.parameters = field(j, "parameters").get<std::map<std::string, std::string>>();
    m.outputs = field(j, "outputs").get<std::vector<std::string>>();
    m.seed = field(j, "seed").get<std::uint64_t>();
    m.hashes = field(j, "hashes").get<std::map<std::string, std::string>>();
    return m;
  });
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path.string());
  out << text;
}

}  // namespace utree
