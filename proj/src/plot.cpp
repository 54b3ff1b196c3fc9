#include "sglab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "sglab/error.hpp"

namespace sglab {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

std::string num(double v, int digits = 4) {
  char b[40];
  std::snprintf(b, sizeof b, "%.*g", digits, v);
  return b;
}

// Shortest labels (at least 4 significant digits) that keep the ticks distinct.
std::vector<std::string> labels(const std::vector<double>& t) {
  std::vector<std::string> l;
  for (int d = 4; d <= 15; ++d) {
    l.clear();
    for (double v : t) l.push_back(num(v, d));
    bool distinct = true;
    for (std::size_t i = 1; i < l.size(); ++i) distinct = distinct && l[i] != l[i - 1];
    if (distinct) break;
  }
  return l;
}

// Tick values (in data units) inside [lo, hi] of the transformed axis.
std::vector<double> ticks(double lo, double hi, bool log) {
  std::vector<double> t;
  if (log) {
    const double span = hi - lo;
    const std::vector<double> mult = span > 2.5 ? std::vector<double>{1} : span > 1.2 ? std::vector<double>{1, 3}
                                                                                   : std::vector<double>{1, 2, 5};
    for (int e = static_cast<int>(std::floor(lo)) - 1; e <= static_cast<int>(std::ceil(hi)); ++e)
      for (double m : mult) {
        const double v = m * std::pow(10.0, e), lv = std::log10(v);
        if (lv >= lo - 1e-9 && lv <= hi + 1e-9) t.push_back(v);
      }
    if (t.size() >= 2) return t;
    t.clear();
  }
  double step = std::pow(10.0, std::floor(std::log10((hi - lo) / 4)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if ((hi - lo) / (m * step) <= 6) {
      step *= m;
      break;
    }
  for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * step; v += step)
    t.push_back(log ? std::pow(10.0, v) : (std::abs(v) < 1e-12 * step ? 0.0 : v));
  return t;
}

}  // namespace

std::string svg_plot(const std::vector<PlotSeries>& series, const PlotOptions& opt) {
  auto tx = [&](double v) { return opt.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return opt.logy ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!opt.logx || x > 0) && (!opt.logy || y > 0);
  };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (usable(s.x[i], s.y[i])) {
        x0 = std::min(x0, tx(s.x[i]));
        x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, ty(s.y[i]));
        y1 = std::max(y1, ty(s.y[i]));
      }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double L = 84, R = 150, T = 40, B = 50;
  const double W = opt.width, H = opt.height;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(opt.title) << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  const auto xt = ticks(x0, x1, opt.logx), yt = ticks(y0, y1, opt.logy);
  const auto xl = labels(xt), yl = labels(yt);
  for (std::size_t i = 0; i < xt.size(); ++i) {
    const double g = px(xt[i]);
    o << "<line x1=\"" << g << "\" y1=\"" << H - B << "\" x2=\"" << g << "\" y2=\"" << H - B + 4 << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << g << "\" y=\"" << H - B + 17 << "\" text-anchor=\"middle\">" << xl[i] << "</text>\n";
  }
  for (std::size_t i = 0; i < yt.size(); ++i) {
    const double g = py(yt[i]);
    o << "<line x1=\"" << L - 4 << "\" y1=\"" << g << "\" x2=\"" << L << "\" y2=\"" << g << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << L - 7 << "\" y=\"" << g + 4 << "\" text-anchor=\"end\">" << yl[i] << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape(opt.xlabel) << "</text>\n";
  // y label sits above the axis so long tick labels cannot collide with it
  o << "<text x=\"" << L << "\" y=\"" << T - 8 << "\" text-anchor=\"start\">" << escape(opt.ylabel) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = kColors[k % 8];
    std::ostringstream pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      if (s.markers)
        o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
      else
        pts << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    if (!s.markers) o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    const double ly = T + 14 + 16.0 * static_cast<double>(k);
    if (s.markers)
      o << "<circle cx=\"" << W - R + 20 << "\" cy=\"" << ly - 4 << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    else
      o << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - R + 34 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series, const PlotOptions& opt) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f << svg_plot(series, opt);
}

}  // namespace sglab
