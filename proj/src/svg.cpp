#include "ssstab/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ssstab/errors.hpp"

namespace ssstab::svg {

namespace {

constexpr std::array<std::string_view, 8> kSeriesColours = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double width, height, left, right, top, bottom;
  double x0, x1, y0, y1;
  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

void header(std::ostringstream& o, const Frame& f, const std::string& title) {
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
    << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << num(f.width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
    << "</text>\n";
}

void axes(std::ostringstream& o, const Frame& f, const std::string& xl, const std::string& yl, int ticks) {
  o << "<g id=\"axes\" stroke=\"black\" fill=\"none\">\n"
    << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\"" << num(f.width - f.left - f.right)
    << "\" height=\"" << num(f.height - f.top - f.bottom) << "\"/>\n</g>\n<g id=\"ticks\" fill=\"black\">\n";
  for (int i = 0; i <= ticks; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / ticks;
    const double yv = f.y0 + (f.y1 - f.y0) * i / ticks;
    o << "<line x1=\"" << num(f.px(xv)) << "\" y1=\"" << num(f.height - f.bottom) << "\" x2=\"" << num(f.px(xv))
      << "\" y2=\"" << num(f.height - f.bottom + 5) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(f.height - f.bottom + 18)
      << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n"
      << "<line x1=\"" << num(f.left - 5) << "\" y1=\"" << num(f.py(yv)) << "\" x2=\"" << num(f.left)
      << "\" y2=\"" << num(f.py(yv)) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << num(f.left - 8) << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">"
      << tick(yv) << "</text>\n";
  }
  o << "<text x=\"" << num((f.left + f.width - f.right) / 2) << "\" y=\"" << num(f.height - 8)
    << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n"
    << "<text x=\"14\" y=\"" << num((f.top + f.height - f.bottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
    << num((f.top + f.height - f.bottom) / 2) << ")\">" << escape(yl) << "</text>\n</g>\n";
}

void legend(std::ostringstream& o, double x, double y,
            const std::vector<std::pair<std::string, std::string_view>>& entries, bool lines) {
  o << "<g id=\"legend\">\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double yy = y + 18.0 * static_cast<double>(i);
    if (lines) {
      o << "<line x1=\"" << num(x) << "\" y1=\"" << num(yy) << "\" x2=\"" << num(x + 16) << "\" y2=\"" << num(yy)
        << "\" stroke=\"" << entries[i].second << "\" stroke-width=\"2\"/>\n";
    } else {
      o << "<circle cx=\"" << num(x + 8) << "\" cy=\"" << num(yy) << "\" r=\"5\" fill=\"" << entries[i].second
        << "\"/>\n";
    }
    o << "<text x=\"" << num(x + 22) << "\" y=\"" << num(yy + 4) << "\">" << escape(entries[i].first) << "</text>\n";
  }
  o << "</g>\n";
}

}  // namespace

std::string_view label_color(modal::StabilityLabel label) {
  static constexpr std::array<std::string_view, modal::kLabelCount> palette = {
      "#006400",  // satisfactory: dark green
      "#90ee90",  // good: light green
      "#32cd32",  // acceptable: green
      "#ff8c00",  // critical: orange
      "#ff0000",  // unstable: red
      "#ff69b4",  // irrelevant: pink
  };
  return palette[modal::label_index(label)];
}

std::string scatter(const dataset::Dataset& ds, std::optional<std::span<const modal::StabilityLabel>> colour_by,
                    const std::string& title) {
  ds.validate();
  const std::span<const modal::StabilityLabel> labels =
      colour_by ? *colour_by : std::span<const modal::StabilityLabel>(ds.labels);
  if (labels.size() != ds.size()) throw ShapeError("scatter: colour labels differ in length from the dataset");

  const Frame f{640, 640, 60, 150, 40, 50, -1.1, 1.1, -1.1, 1.1};
  std::ostringstream o;
  header(o, f, title);
  axes(o, f, "Real", "Imaginary", 4);
  const double r = f.px(1.0) - f.px(0.0);
  o << "<circle id=\"unit-circle\" cx=\"" << num(f.px(0)) << "\" cy=\"" << num(f.py(0)) << "\" r=\"" << num(r)
    << "\" fill=\"none\" stroke=\"#555555\"/>\n"
    << "<line id=\"stability-boundary\" x1=\"" << num(f.px(0)) << "\" y1=\"" << num(f.py(f.y1)) << "\" x2=\""
    << num(f.px(0)) << "\" y2=\"" << num(f.py(f.y0)) << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";

  std::array<bool, modal::kLabelCount> present{};
  o << "<g id=\"points\" fill-opacity=\"0.8\">\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    present[modal::label_index(labels[i])] = true;
    o << "<circle cx=\"" << num(f.px(ds.features(static_cast<Eigen::Index>(i), 0))) << "\" cy=\""
      << num(f.py(ds.features(static_cast<Eigen::Index>(i), 1))) << "\" r=\"2\" fill=\"" << label_color(labels[i])
      << "\"/>\n";
  }
  o << "</g>\n";
  std::vector<std::pair<std::string, std::string_view>> entries;
  for (const auto label : modal::kLabelOrder) {
    if (present[modal::label_index(label)]) entries.emplace_back(std::string(modal::label_name(label)), label_color(label));
  }
  if (!entries.empty()) legend(o, f.width - f.right + 15, f.top + 10, entries, false);
  o << "</svg>\n";
  return o.str();
}

std::string line_plot(std::span<const Series> series, const std::string& title, const std::string& x_label,
                      const std::string& y_label, std::size_t max_points) {
  if (max_points < 2) throw DomainError("line_plot: max_points must be >= 2");
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ShapeError("line_plot: series '" + s.name + "' has mismatched x and y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x0 < x1)) {
    x0 = std::isfinite(x0) ? x0 - 0.5 : 0.0;
    x1 = x0 + 1.0;
  }
  if (!(y0 < y1)) {
    y0 = std::isfinite(y0) ? y0 - 0.5 : 0.0;
    y1 = y0 + 1.0;
  }
  const double pad = 0.05 * (y1 - y0);
  const Frame f{720, 480, 70, 150, 40, 50, x0, x1, y0 - pad, y1 + pad};
  std::ostringstream o;
  header(o, f, title);
  axes(o, f, x_label, y_label, 5);
  std::vector<std::pair<std::string, std::string_view>> entries;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const auto colour = kSeriesColours[k % kSeriesColours.size()];
    entries.emplace_back(s.name, colour);
    const std::size_t span = s.x.empty() ? 0 : s.x.size() - 1;
    const std::size_t stride = std::max<std::size_t>(1, (span + max_points - 2) / (max_points - 1));
    o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); i += stride) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i])) << ' ';
    }
    if (!s.x.empty() && (s.x.size() - 1) % stride != 0) o << num(f.px(s.x.back())) << ',' << num(f.py(s.y.back()));
    o << "\"/>\n";
  }
  if (!entries.empty()) legend(o, f.width - f.right + 15, f.top + 10, entries, true);
  o << "</svg>\n";
  return o.str();
}

}  // namespace ssstab::svg
