#include "antifrag/jammer.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include <fmt/format.h>

namespace antifrag {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view to_string(JammerModel model) {
  switch (model) {
    case JammerModel::DRFM: return "DRFM";
    case JammerModel::PS: return "PS";
    case JammerModel::AS: return "AS";
  }
  return "?";
}

JammerModel parse_jammer_model(std::string_view name) {
  const std::string s = lower(name);
  if (s == "drfm") return JammerModel::DRFM;
  if (s == "ps") return JammerModel::PS;
  if (s == "as") return JammerModel::AS;
  throw DomainError(fmt::format("unknown jammer model '{}'", name));
}

std::string_view to_string(JammerClass cls) {
  switch (cls) {
    case JammerClass::DRFM: return "DRFM";
    case JammerClass::PS: return "PS";
    case JammerClass::AS: return "AS";
    case JammerClass::Unknown: return "Unknown";
  }
  return "?";
}

bool matches(JammerClass cls, JammerModel model) {
  switch (model) {
    case JammerModel::DRFM: return cls == JammerClass::DRFM;
    case JammerModel::PS: return cls == JammerClass::PS;
    case JammerModel::AS: return cls == JammerClass::AS;
  }
  return false;
}

std::string_view to_string(PathTopology topology) {
  return topology == PathTopology::SourceAware ? "source_aware" : "ris_aware";
}

PathTopology parse_topology(std::string_view name) {
  const std::string s = lower(name);
  if (s == "source_aware" || s == "source-aware") return PathTopology::SourceAware;
  if (s == "ris_aware" || s == "ris-aware") return PathTopology::RisAware;
  throw DomainError(fmt::format("unknown topology '{}'", name));
}

}  // namespace antifrag
