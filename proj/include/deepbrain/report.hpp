// SPDX-License-Identifier: Apache-2.0
#pragma once

// CSV, JSON and SVG renderings of evaluation results.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "benchmark.hpp"
#include "evaluation.hpp"

namespace deepbrain {

inline std::string fmt_num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline constexpr const char* kComparisonHeader = "method,accuracy,precision,recall,f1,auc";

inline void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << kComparisonHeader << '\n';
  for (const auto& r : rows)
    out << kind_name(r.kind) << ',' << fmt_num(r.accuracy) << ',' << fmt_num(r.precision) << ','
        << fmt_num(r.recall) << ',' << fmt_num(r.f1) << ',' << fmt_num(r.auc) << '\n';
}

inline void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "threshold,fpr,tpr\n";
  for (const auto& p : curve.points)
    out << fmt_num(p.threshold) << ',' << fmt_num(p.fpr) << ',' << fmt_num(p.tpr) << '\n';
}

inline void write_similarity_csv(std::ostream& out, const SimilarityMatrix& m) {
  out << "class";
  for (auto c : kAllClasses) out << ',' << class_name(c);
  out << ",self,cross\n";
  for (auto a : kAllClasses) {
    const auto i = class_index(a);
    out << class_name(a);
    for (auto b : kAllClasses) out << ',' << fmt_num(m.values[i][class_index(b)]);
    out << ',' << fmt_num(m.self[i]) << ',' << fmt_num(m.cross[i]) << '\n';
  }
}

inline nlohmann::ordered_json metrics_to_json(const MetricsReport& r) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v); };
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["precision"] = r.weighted_precision;
  j["recall"] = r.weighted_recall;
  j["f1"] = r.weighted_f1;
  j["auc"] = num(r.micro_auc);
  j["macro"] = {{"precision", r.macro_precision}, {"recall", r.macro_recall}, {"f1", r.macro_f1}};
  auto& per = j["per_class"] = nlohmann::ordered_json::object();
  for (auto c : kAllClasses) {
    const auto& m = r.per_class[class_index(c)];
    per[std::string(class_name(c))] = {{"tp", m.counts.tp},
                                       {"fp", m.counts.fp},
                                       {"tn", m.counts.tn},
                                       {"fn", m.counts.fn},
                                       {"support", m.support},
                                       {"precision", m.precision},
                                       {"recall", m.recall},
                                       {"f1", m.f1},
                                       {"tpr", m.tpr},
                                       {"fpr", m.fpr},
                                       {"auc", num(m.auc)},
                                       {"precision_undefined", m.precision_undefined}};
  }
  return j;
}

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Standalone line chart over [0,1]x[0,1] axes (ROC) or any data range.
inline std::string render_svg_lines(const std::string& title, const std::string& x_label,
                                    const std::string& y_label, const std::vector<SvgSeries>& series,
                                    bool unit_square = true) {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!unit_square) {
    x0 = y0 = INFINITY;
    x1 = y1 = -INFINITY;
    for (const auto& s : series)
      for (auto [x, y] : s.points) {
        x0 = std::min(x0, x); x1 = std::max(x1, x);
        y0 = std::min(y0, y); y1 = std::max(y1, y);
      }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
  }
  const double W = 480, H = 400, L = 60, R = 140, T = 40, B = 50;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
    << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << x_label << "</text>\n"
    << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
    << ")\" text-anchor=\"middle\" font-size=\"12\">" << y_label << "</text>\n"
    << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\" font-size=\"10\">" << fmt_num(x0) << "</text>\n"
    << "<text x=\"" << W - R << "\" y=\"" << H - B + 16 << "\" text-anchor=\"end\" font-size=\"10\">"
    << fmt_num(x1) << "</text>\n"
    << "<text x=\"" << L - 4 << "\" y=\"" << H - B << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_num(y0)
    << "</text>\n"
    << "<text x=\"" << L - 4 << "\" y=\"" << T + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_num(y1)
    << "</text>\n";
  if (unit_square)
    o << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(1) << "\" y2=\"" << sy(1)
      << "\" stroke=\"#bbb\" stroke-dasharray=\"4 4\"/>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = colors[i % std::size(colors)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : series[i].points) o << fmt_num(sx(x)) << ',' << fmt_num(sy(y)) << ' ';
    o << "\"/>\n<text x=\"" << W - R + 8 << "\" y=\"" << T + 16 * (i + 1) << "\" font-size=\"11\" fill=\""
      << color << "\">" << series[i].label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline SvgSeries roc_series(const std::string& label, const RocCurve& c) {
  SvgSeries s{label, {}};
  for (const auto& p : c.points) s.points.emplace_back(p.fpr, p.tpr);
  return s;
}

}  // namespace deepbrain
