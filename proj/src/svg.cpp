#include "picap/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "picap/serialize.hpp"

namespace picap {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kMarginL = 70, kMarginR = 20, kMarginT = 40, kMarginB = 50;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    } else {
      const double p = 0.05 * (hi - lo);
      lo -= p;
      hi += p;
    }
  }
};

std::string fmt_tick(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

void write_svg_plot(const std::filesystem::path& path,
                    const std::string& title, const std::string& x_label,
                    const std::string& y_label,
                    const std::vector<SvgSeries>& series) {
  Range rx, ry;
  for (const auto& s : series) {
    for (double v : s.xs) rx.include(v);
    for (double v : s.ys) ry.include(v);
  }
  if (series.empty() || !std::isfinite(rx.lo) || !std::isfinite(ry.lo)) {
    rx = {0, 1};
    ry = {0, 1};
  }
  rx.pad();
  ry.pad();

  const auto px = [&](double x) {
    return kMarginL + (x - rx.lo) / (rx.hi - rx.lo) *
                          (kWidth - kMarginL - kMarginR);
  };
  const auto py = [&](double y) {
    return kHeight - kMarginB -
           (y - ry.lo) / (ry.hi - ry.lo) * (kHeight - kMarginT - kMarginB);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
     << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"15\">"
     << title << "</text>\n";

  // Axes with 5 ticks each.
  os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = rx.lo + (rx.hi - rx.lo) * t / 4.0;
    const double fy = ry.lo + (ry.hi - ry.lo) * t / 4.0;
    os << "<line x1=\"" << px(fx) << "\" y1=\"" << py(ry.lo) << "\" x2=\""
       << px(fx) << "\" y2=\"" << py(ry.hi)
       << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    os << "<line x1=\"" << px(rx.lo) << "\" y1=\"" << py(fy) << "\" x2=\""
       << px(rx.hi) << "\" y2=\"" << py(fy)
       << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << px(fx) << "\" y=\"" << kHeight - kMarginB + 16
       << "\" text-anchor=\"middle\">" << fmt_tick(fx) << "</text>\n";
    os << "<text x=\"" << kMarginL - 6 << "\" y=\"" << py(fy) + 4
       << "\" text-anchor=\"end\">" << fmt_tick(fy) << "</text>\n";
  }
  os << "</g>\n";
  os << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\""
     << kWidth - kMarginL - kMarginR << "\" height=\""
     << kHeight - kMarginT - kMarginB
     << "\" fill=\"none\" stroke=\"#555\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"12\">"
     << x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << kHeight / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"12\" transform=\"rotate(-90 16 "
     << kHeight / 2 << ")\">" << y_label << "</text>\n";

  double legend_y = kMarginT + 14;
  for (const auto& s : series) {
    if (s.line) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color
         << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.xs.size(); ++i)
        os << px(s.xs[i]) << "," << py(s.ys[i]) << " ";
      os << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < s.xs.size(); ++i)
        os << "<circle cx=\"" << px(s.xs[i]) << "\" cy=\"" << py(s.ys[i])
           << "\" r=\"3\" fill=\"" << s.color << "\" fill-opacity=\"0.8\"/>\n";
    }
    if (!s.label.empty()) {
      os << "<rect x=\"" << kWidth - kMarginR - 130 << "\" y=\""
         << legend_y - 9 << "\" width=\"10\" height=\"10\" fill=\"" << s.color
         << "\"/>\n";
      os << "<text x=\"" << kWidth - kMarginR - 115 << "\" y=\"" << legend_y
         << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label
         << "</text>\n";
      legend_y += 16;
    }
  }
  os << "</svg>\n";
  write_text_file(path, os.str());
}

}  // namespace picap
