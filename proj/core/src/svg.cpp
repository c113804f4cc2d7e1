#include "trajprop/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>

namespace trajprop {

namespace {

constexpr double kSize = 480.0;
constexpr double kPad = 40.0;
const char* const kColors[] = {"#d62728", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_topk_svg(const ProposalSet& ps, const std::vector<Vec2>& truth, std::size_t k,
                            const std::string& title) {
  std::vector<Vec2> obs{ps.observed.origin};
  for (const Vec2 d : ps.observed.deltas) obs.push_back(obs.back() + d);
  const Vec2 last = obs.back();
  auto with_start = [&](const std::vector<Vec2>& fut) {
    std::vector<Vec2> pts{last};
    for (const Vec2 p : integrate(fut, last)) pts.push_back(p);
    return pts;
  };

  std::vector<std::size_t> order(ps.size());
  std::iota(order.begin(), order.end(), 0);
  if (ps.has_probabilities()) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (ps.probabilities[a] != ps.probabilities[b]) return ps.probabilities[a] > ps.probabilities[b];
      return ps.proposals[a].cluster < ps.proposals[b].cluster;
    });
  }
  order.resize(std::min(k, order.size()));

  std::vector<std::vector<Vec2>> paths{obs, with_start(truth)};
  for (std::size_t i : order) paths.push_back(with_start(ps.proposals[i].future));

  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x, hi_x = -lo_x, hi_y = -lo_x;
  for (const auto& p : paths) {
    for (const Vec2 v : p) {
      lo_x = std::min(lo_x, v.x);
      hi_x = std::max(hi_x, v.x);
      lo_y = std::min(lo_y, v.y);
      hi_y = std::max(hi_y, v.y);
    }
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-6});
  const double s = (kSize - 2 * kPad) / span;
  auto px = [&](Vec2 v) { return fmt(kPad + (v.x - lo_x) * s) + "," + fmt(kSize - kPad - (v.y - lo_y) * s); };
  auto polyline = [&](const std::vector<Vec2>& p, const std::string& color, const std::string& extra) {
    std::string pts;
    for (const Vec2 v : p) pts += px(v) + " ";
    pts.pop_back();
    return "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"" + extra + " points=\"" + pts +
           "\"/>\n";
  };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kSize) + "\" height=\"" +
                    fmt(kSize) + "\" viewBox=\"0 0 " + fmt(kSize) + " " + fmt(kSize) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">" + escape(title) + "</text>\n";
  out += polyline(paths[0], "#000000", "");
  out += polyline(paths[1], "#2ca02c", " stroke-dasharray=\"6,4\"");
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& p = paths[2 + r];
    const auto& prop = ps.proposals[order[r]];
    const std::string color = kColors[r % std::size(kColors)];
    out += polyline(p, color, " stroke-opacity=\"0.85\"");
    std::string label = prop.cluster >= 0 ? "c" + std::to_string(prop.cluster) : "#" + std::to_string(order[r]);
    if (ps.has_probabilities()) label += " p=" + fmt(ps.probabilities[order[r]]);
    const auto xy = px(p.back());
    const auto comma = xy.find(',');
    out += "<text x=\"" + xy.substr(0, comma) + "\" y=\"" + xy.substr(comma + 1) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color + "\">" + escape(label) + "</text>\n";
  }
  out += "<text x=\"10\" y=\"" + fmt(kSize - 10) +
         "\" font-family=\"sans-serif\" font-size=\"11\">black: observed, green dashed: ground truth</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace trajprop
