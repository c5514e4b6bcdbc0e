#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "utree/span.hpp"

namespace utree {

using Json = nlohmann::json;

Json to_json(const Rational& r);
Rational rational_from_json(const Json& j);

/// Complex rationals are [re, im] string pairs; a bare string is real.
Json to_json(const CRational& c);
CRational complex_from_json(const Json& j);

/// Array of m [re, im] pairs: strings in exact mode, numbers in float mode.
Json to_json(const Value& v);
/// A flat [re, im] pair is accepted for m = 1.
Value value_from_json(const Json& j, std::size_t m, Mode mode);

Json to_json(const TreeConfig& config);
TreeConfig tree_from_json(const Json& j);

Json to_json(const SimpleFunction& f);
SimpleFunction simple_from_json(const Json& j);

Json to_json(const HarmonicTruncation& f);
HarmonicTruncation harmonic_from_json(const Json& j);

Json to_json(const Target& t);
Target target_from_json(const Json& j);
Json to_json(const std::vector<Target>& targets);
std::vector<Target> targets_from_json(const Json& j);

Json to_json(const Schedule& s);
Schedule schedule_from_json(const Json& j);

Json to_json(const IndexSet& s);
IndexSet index_set_from_json(const Json& j);

Json to_json(const DensityReport& r);
DensityReport density_from_json(const Json& j);

/// Horizon, anchor level, prefix, per-level log, tolerances, visits and the
/// audit summary. Class profiles are not serialized.
Json to_json(const BuildResult& r);
BuildResult build_from_json(const Json& j);

Json to_json(const Combo& c);
Combo combo_from_json(const Json& j);

Json to_json(const CertificateEntry& e);
CertificateEntry certificate_entry_from_json(const Json& j);
Json to_json(const SpanCertificate& c);
SpanCertificate certificate_from_json(const Json& j);

struct RunManifest {
  std::string config_path;
  std::string command;
  std::map<std::string, std::string> parameters;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> hashes;  // output path -> SHA-256 hex
};

Json to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);

/// ParseError on unreadable files or malformed JSON.
Json read_json_file(const std::filesystem::path& path);
/// Two-space indented, trailing newline.
std::string dump(const Json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace utree
