#include "polopt/svg.hpp"

#include <algorithm>
#include <array>
#include <numbers>
#include <sstream>

#include "csv_format.hpp"

namespace polopt {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMargin = 56.0;
constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Axes {
  double x0, x1, y0, y1;

  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

void frame(std::ostringstream& os, const Axes& ax, const std::string& title, const std::string& xlabel,
           const std::string& ylabel, int xticks, int yticks) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << ax.px(ax.x0) << "\" y1=\"" << ax.py(ax.y0) << "\" x2=\"" << ax.px(ax.x1) << "\" y2=\""
     << ax.py(ax.y0) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ax.px(ax.x0) << "\" y1=\"" << ax.py(ax.y0) << "\" x2=\"" << ax.px(ax.x0) << "\" y2=\""
     << ax.py(ax.y1) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= xticks; ++i) {
    const double x = ax.x0 + (ax.x1 - ax.x0) * i / xticks;
    os << "<text x=\"" << ax.px(x) << "\" y=\"" << ax.py(ax.y0) + 16 << "\" text-anchor=\"middle\">"
       << csv::num(std::round(x * 100) / 100) << "</text>\n";
  }
  for (int i = 0; i <= yticks; ++i) {
    const double y = ax.y0 + (ax.y1 - ax.y0) * i / yticks;
    os << "<text x=\"" << ax.px(ax.x0) - 6 << "\" y=\"" << ax.py(y) + 4 << "\" text-anchor=\"end\">"
       << csv::num(std::round(y * 100) / 100) << "</text>\n";
  }
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 14 << "\" text-anchor=\"middle\">" << xlabel
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << kHeight / 2 << ")\">" << ylabel << "</text>\n";
}

}  // namespace

std::string accuracy_plot_svg(const SweepResult& result, Condition condition) {
  int kmin = 1 << 30, kmax = 0;
  for (const auto& s : result.summary)
    if (s.condition == condition) {
      kmin = std::min(kmin, s.k);
      kmax = std::max(kmax, s.k);
    }
  if (kmax == 0) kmin = kmax = 1;
  const Axes ax{static_cast<double>(kmin), static_cast<double>(std::max(kmax, kmin + 1)), 0.0, 1.0};

  std::ostringstream os;
  frame(os, ax, "Accuracy vs captures (" + std::string(to_string(condition)) + ")", "captures K", "test accuracy",
        std::max(1, std::min(10, kmax - kmin)), 5);

  int series = 0;
  for (Regime regime : {Regime::Random, Regime::Uniform, Regime::Optimized}) {
    std::vector<const SummaryRecord*> pts;
    for (const auto& s : result.summary)
      if (s.condition == condition && s.regime == regime) pts.push_back(&s);
    if (pts.empty()) continue;
    const char* color = kPalette[series++ % kPalette.size()];
    std::ostringstream band, line;
    for (const auto* p : pts) band << ax.px(p->k) << "," << ax.py(std::min(1.0, p->mean_accuracy + p->std_accuracy)) << " ";
    for (auto it = pts.rbegin(); it != pts.rend(); ++it)
      band << ax.px((*it)->k) << "," << ax.py(std::max(0.0, (*it)->mean_accuracy - (*it)->std_accuracy)) << " ";
    for (const auto* p : pts) line << ax.px(p->k) << "," << ax.py(p->mean_accuracy) << " ";
    os << "<polygon points=\"" << band.str() << "\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    os << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kMargin + 16 * series << "\" text-anchor=\"end\" fill=\""
       << color << "\">" << to_string(regime) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string angle_scatter_svg(const AngleAnalysis& analysis) {
  const Axes ax{0.0, 180.0, 0.0, 180.0};
  const bool lp = analysis.condition == Condition::LP;
  std::ostringstream os;
  frame(os, ax, std::string("Optimized angles (") + std::string(to_string(analysis.condition)) + ")",
        lp ? "generator LP angle (deg)" : "generator QWP angle (deg)",
        lp ? "analyzer LP angle (deg)" : "analyzer QWP angle (deg)", 4, 4);
  constexpr double kDeg = 180.0 / std::numbers::pi;
  for (const auto& trial : analysis.trials) {
    for (std::size_t r = 0; r < trial.size(); ++r) {
      const auto& a = trial[r];
      const double x = (lp ? a.theta_lg : a.theta_qg) * kDeg;
      const double y = (lp ? a.theta_la : a.theta_qa) * kDeg;
      os << "<circle cx=\"" << ax.px(x) << "\" cy=\"" << ax.py(y) << "\" r=\"4\" fill=\""
         << kPalette[r % kPalette.size()] << "\" fill-opacity=\"0.8\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace polopt
