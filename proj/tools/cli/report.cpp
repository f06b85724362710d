#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"

namespace intent_lab::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string iso_utc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* regime_color(Regime r) {
  switch (r) {
    case Regime::Specialization: return "#4e79a7";
    case Regime::CompetitiveBatching: return "#f28e2b";
    case Regime::UncompetitiveBatchingSolver1: return "#59a14f";
    case Regime::UncompetitiveBatchingSolver2: return "#e15759";
  }
  return "#000000";
}

}  // namespace

Manifest make_manifest(const Config& config, const std::string& subcommand, std::vector<std::string> outputs) {
  Manifest m;
  m.subcommand = subcommand;
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(fnv1a64(config.text)));
  m.config_digest = buf;
  m.version = kVersion;
  std::time_t t = std::time(nullptr);
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(sde, &end, 10);
    if (end != sde && *end == '\0') t = static_cast<std::time_t>(v);
  }
  m.timestamp = iso_utc(t);
  m.outputs = std::move(outputs);
  return m;
}

std::string manifest_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["tool"] = "intent_lab";
  j["version"] = m.version;
  j["subcommand"] = m.subcommand;
  j["config_digest"] = m.config_digest;
  j["timestamp"] = m.timestamp;
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

std::string regime_map_svg(const MarketParams& p, int cells) {
  const int size = 480, margin = 60;
  const double cell = static_cast<double>(size) / cells;
  auto px = [&](double beta) { return margin + (beta - p.beta_lo) / (p.beta_hi - p.beta_lo) * size; };
  auto py = [&](double delta) { return margin + size - (delta - p.delta_lo) / (p.delta_hi - p.delta_lo) * size; };
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  const int width = size + 2 * margin + 220, height = size + 2 * margin;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      const double beta = p.beta_lo + (i + 0.5) / cells * (p.beta_hi - p.beta_lo);
      const double delta = p.delta_lo + (j + 0.5) / cells * (p.delta_hi - p.delta_lo);
      os << "<rect x=\"" << margin + i * cell << "\" y=\"" << margin + size - (j + 1) * cell << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"" << regime_color(classify_regime(p, beta, delta)) << "\"/>\n";
    }
  }
  const double gb = p.g_beta_lo(), gd = p.g_delta_lo();
  if (gb > p.beta_lo && gb < p.beta_hi)
    os << "<line x1=\"" << px(gb) << "\" y1=\"" << margin << "\" x2=\"" << px(gb) << "\" y2=\"" << margin + size
       << "\" stroke=\"#000000\" stroke-dasharray=\"4 3\"/>\n";
  if (gd > p.delta_lo && gd < p.delta_hi)
    os << "<line x1=\"" << margin << "\" y1=\"" << py(gd) << "\" x2=\"" << margin + size << "\" y2=\"" << py(gd)
       << "\" stroke=\"#000000\" stroke-dasharray=\"4 3\"/>\n";
  os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size << "\" height=\"" << size
     << "\" fill=\"none\" stroke=\"#000000\"/>\n";
  os.precision(3);
  os << "<text x=\"" << margin + size / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\" font-size=\"14\">beta ["
     << p.beta_lo << ", " << p.beta_hi << "]</text>\n";
  os << "<text x=\"15\" y=\"" << margin + size / 2 << "\" font-size=\"14\" transform=\"rotate(-90 15 "
     << margin + size / 2 << ")\" text-anchor=\"middle\">delta [" << p.delta_lo << ", " << p.delta_hi << "]</text>\n";
  os << "<text x=\"" << margin << "\" y=\"30\" font-size=\"15\">fair combinatorial first-price regimes, g = " << p.g
     << "</text>\n";
  int row = 0;
  for (Regime r : {Regime::Specialization, Regime::CompetitiveBatching, Regime::UncompetitiveBatchingSolver1,
                   Regime::UncompetitiveBatchingSolver2}) {
    const int y = margin + 20 + 28 * row++;
    os << "<rect x=\"" << margin + size + 20 << "\" y=\"" << y - 12 << "\" width=\"16\" height=\"16\" fill=\""
       << regime_color(r) << "\"/>\n";
    os << "<text x=\"" << margin + size + 44 << "\" y=\"" << y + 1 << "\" font-size=\"12\">" << to_string(r)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace intent_lab::cli
