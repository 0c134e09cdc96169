#include "scaling/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "scaling/errors.hpp"
#include "scaling/frontier.hpp"

namespace scaling {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 30.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 70.0;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

// Log-log mapping from data to the plot viewport, padded to whole decades.
struct LogAxes {
  double x_lo, x_hi, y_lo, y_hi;  // log10 bounds

  LogAxes(double xmin, double xmax, double ymin, double ymax)
      : x_lo(std::floor(std::log10(xmin))),
        x_hi(std::ceil(std::log10(xmax))),
        y_lo(std::floor(std::log10(ymin))),
        y_hi(std::ceil(std::log10(ymax))) {
    if (x_hi <= x_lo) x_hi = x_lo + 1;
    if (y_hi <= y_lo) y_hi = y_lo + 1;
  }

  double px(double x) const {
    return kLeft + (std::log10(x) - x_lo) / (x_hi - x_lo) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (std::log10(y) - y_lo) / (y_hi - y_lo) * (kHeight - kTop - kBottom);
  }
};

std::string header(std::string_view title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{3}</text>\n",
      kWidth, kHeight, kWidth / 2, title);
}

std::string axes(const LogAxes& ax, std::string_view x_label, std::string_view y_label) {
  std::string s;
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" stroke=\"black\"/>\n",
                   x0, y1, x1 - x0, y0 - y1);
  const int x_step = std::max(1, static_cast<int>(std::ceil((ax.x_hi - ax.x_lo) / 10)));
  for (int e = static_cast<int>(ax.x_lo); e <= static_cast<int>(ax.x_hi); e += x_step) {
    const double x = ax.px(std::pow(10.0, e));
    s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#ddd\"/>\n", x, y0, y1);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">1e{}</text>\n",
                     x, y0 + 18, e);
  }
  const int y_step = std::max(1, static_cast<int>(std::ceil((ax.y_hi - ax.y_lo) / 10)));
  for (int e = static_cast<int>(ax.y_lo); e <= static_cast<int>(ax.y_hi); e += y_step) {
    const double y = ax.py(std::pow(10.0, e));
    s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#ddd\"/>\n", x0, y, x1);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">1e{}</text>\n",
                     x0 - 6, y + 4, e);
  }
  s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
                   (x0 + x1) / 2, kHeight - 20, x_label);
  s += fmt::format("<text x=\"20\" y=\"{0:.2f}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0:.2f})\">{1}</text>\n",
                   (y0 + y1) / 2, y_label);
  return s;
}

std::string polyline(const LogAxes& ax, const std::vector<std::pair<double, double>>& pts,
                     std::string_view colour, std::string_view extra = "") {
  std::string coords;
  for (const auto& [x, y] : pts) {
    if (!coords.empty()) coords += ' ';
    coords += fmt::format("{:.2f},{:.2f}", ax.px(x), ax.py(y));
  }
  return fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{}/>\n", coords,
                     colour, extra);
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DomainError(fmt::format("CSV has no column '{}'", name));
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  bool first = true;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.emplace_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

std::string render_curve_svg(std::string_view csv) {
  const CsvTable t = parse_csv(csv);
  const auto c_col = t.column("C"), n_col = t.column("n"), total_col = t.column("total"),
             status_col = t.column("status");
  std::vector<std::string> budgets;
  std::vector<std::vector<std::pair<double, double>>> curves;
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0;
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0;
  for (const auto& row : t.rows) {
    if (row[status_col] != "ok") continue;
    if (budgets.empty() || budgets.back() != row[c_col]) {
      budgets.push_back(row[c_col]);
      curves.emplace_back();
    }
    const double n = std::stod(row[n_col]);
    const double v = std::stod(row[total_col]);
    curves.back().emplace_back(n, v);
    xmin = std::min(xmin, n);
    xmax = std::max(xmax, n);
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  }
  std::string s = header("Error bound vs width at fixed FLOP budget");
  if (curves.empty()) return s + "</svg>\n";
  const LogAxes ax(xmin, std::max(xmax, xmin * 10), ymin, ymax);
  s += axes(ax, "width n", "bound (nats)");
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* colour = kPalette[c % std::size(kPalette)];
    s += polyline(ax, curves[c], colour);
    const auto best = std::min_element(curves[c].begin(), curves[c].end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"5\" fill=\"{}\" stroke=\"black\"/>\n",
                     ax.px(best->first), ax.py(best->second), colour);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{}\">C = {}</text>\n",
                     kWidth - kRight - 150, kTop + 18 + 16 * static_cast<double>(c), colour, budgets[c]);
  }
  return s + "</svg>\n";
}

std::string render_frontier_svg(std::string_view csv) {
  const CsvTable t = parse_csv(csv);
  const auto t_col = t.column("T_star"), p_col = t.column("param_count");
  std::vector<double> xs, ys;
  for (const auto& row : t.rows) {
    xs.push_back(std::stod(row[t_col]));
    ys.push_back(std::stod(row[p_col]));
  }
  std::string s = header("Compute-optimal parameter count vs dataset size");
  if (xs.empty()) return s + "</svg>\n";
  const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
  const auto [ylo, yhi] = std::minmax_element(ys.begin(), ys.end());
  const double lo = std::min(*xlo, *ylo), hi = std::max(*xhi, *yhi);
  const LogAxes ax(lo, hi, lo, hi);
  s += axes(ax, "tokens T*", "parameter count d n*");

  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < xs.size(); ++i) pts.emplace_back(xs[i], ys[i]);
  s += polyline(ax, pts, kPalette[0]);
  for (const auto& [x, y] : pts) {
    s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", ax.px(x), ax.py(y), kPalette[0]);
  }
  // Slope-1 reference through the first point.
  const double x_first = xs.front(), y_first = ys.front();
  s += polyline(ax, {{*xlo, y_first * *xlo / x_first}, {*xhi, y_first * *xhi / x_first}}, "#555",
                " stroke-dasharray=\"8 6\"");
  if (xs.size() >= 3) {
    try {
      const double slope = loglog_slope(xs, ys);
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += std::log(xs[i]);
        my += std::log(ys[i]);
      }
      mx /= static_cast<double>(xs.size());
      my /= static_cast<double>(xs.size());
      auto fit = [&](double x) { return std::exp(my + slope * (std::log(x) - mx)); };
      s += polyline(ax, {{*xlo, fit(*xlo)}, {*xhi, fit(*xhi)}}, kPalette[3], " stroke-opacity=\"0.7\"");
      s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{}\">fitted slope {:.4f}</text>\n",
                       kLeft + 12, kTop + 18, kPalette[3], slope);
    } catch (const EstimationError&) {
    }
  }
  s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#555\">dashed: slope 1</text>\n",
                   kLeft + 12, kTop + 34);
  return s + "</svg>\n";
}

}  // namespace scaling
