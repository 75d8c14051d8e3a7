#include "genforge/analysis.hpp"
#include "genforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace genforge {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json copy_rates_json(const std::vector<CopyRatePoint>& points) {
  json out = json::array();
  for (const auto& p : points)
    out.push_back({{"n", p.n}, {"mean", optional_number(p.mean)}, {"defined", p.defined}});
  return out;
}

json buckets_json(const BucketStats& stats) {
  json buckets = json::array();
  for (const auto& b : stats.buckets) {
    const BoxStats& s = b.stats;
    buckets.push_back({{"lo", number_or_null(b.lo)},
                       {"hi", number_or_null(b.hi)},
                       {"overflow", b.overflow},
                       {"count", s.count},
                       {"defined", s.defined},
                       {"mean", optional_number(s.mean)},
                       {"std", optional_number(s.std)},
                       {"min", optional_number(s.min)},
                       {"q1", optional_number(s.q1)},
                       {"median", optional_number(s.median)},
                       {"q3", optional_number(s.q3)},
                       {"max", optional_number(s.max)}});
  }
  return {{"edges", stats.edges}, {"buckets", buckets}};
}

json wins_json(const WinCounts& w) { return {{"a", w.a}, {"b", w.b}, {"ties", w.ties}}; }

json comparison_json(const Comparison& c) {
  json metrics = json::object();
  for (const auto& [name, d] : c.metrics) {
    json per_sample = json::array();
    for (double v : d.per_sample) per_sample.push_back(number_or_null(v));
    metrics[name] = {{"corpus_a", number_or_null(d.corpus_a)},
                     {"corpus_b", number_or_null(d.corpus_b)},
                     {"delta", number_or_null(d.delta)},
                     {"per_sample", per_sample}};
  }
  json buckets = json::array();
  for (const auto& w : c.per_bucket) buckets.push_back(wins_json(w));
  return {{"model_a", c.model_a},
          {"model_b", c.model_b},
          {"bucket_metric", c.bucket_metric},
          {"edges", c.edges},
          {"metrics", metrics},
          {"wins", wins_json(c.overall)},
          {"wins_per_bucket", buckets},
          {"copy_rates_a", copy_rates_json(c.copy_a)},
          {"copy_rates_b", copy_rates_json(c.copy_b)},
          {"copy_rates_reference", copy_rates_json(c.copy_reference)},
          {"copying_a", c.copying_a},
          {"copying_b", c.copying_b}};
}

json results_json(const AnalysisResults& r) {
  json models = json::array();
  for (const auto& m : r.models)
    models.push_back({{"name", m.name},
                      {"length_buckets", buckets_json(m.buckets)},
                      {"copy_rates", copy_rates_json(m.copy_rates)}});
  return {{"title", r.title},
          {"metric", r.metric},
          {"models", models},
          {"reference_copy_rates", copy_rates_json(r.reference_copy_rates)},
          {"comparison", r.comparison ? comparison_json(*r.comparison) : json(nullptr)}};
}

// ---------------------------------------------------------------------------
// HTML

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
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

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fixed(const std::optional<double>& v, int digits = 4) {
  return v && std::isfinite(*v) ? fixed(*v, digits) : "&ndash;";
}

std::string bucket_label(const Bucket& b) {
  if (b.overflow) return "&ge;" + fixed(b.lo, 0) + " / other";
  return "[" + fixed(b.lo, 0) + ", " + fixed(b.hi, 0) + ")";
}

const char* const kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3"};

constexpr double kPlotTop = 20;
constexpr double kPlotHeight = 200;
constexpr double kPlotLeft = 50;
constexpr double kSlot = 90;

/// Vertical range shared by every boxplot: [min(0, data), max(1, data)].
std::pair<double, double> value_range(const AnalysisResults& r) {
  double lo = 0, hi = 1;
  for (const auto& m : r.models)
    for (const auto& b : m.buckets.buckets)
      if (b.stats.defined > 0) {
        lo = std::min(lo, *b.stats.min);
        hi = std::max(hi, *b.stats.max);
      }
  return {lo, hi};
}

double y_of(double v, double lo, double hi) {
  return kPlotTop + kPlotHeight * (1.0 - (v - lo) / (hi - lo));
}

void axis(std::ostream& out, double lo, double hi, double width) {
  const std::string x0 = format_coord(kPlotLeft);
  out << "<line x1=\"" << x0 << "\" y1=\"" << format_coord(kPlotTop) << "\" x2=\"" << x0
      << "\" y2=\"" << format_coord(kPlotTop + kPlotHeight) << "\" class=\"axis\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    const std::string y = format_coord(y_of(v, lo, hi));
    out << "<line x1=\"" << x0 << "\" y1=\"" << y << "\" x2=\"" << format_coord(width - 10)
        << "\" y2=\"" << y << "\" class=\"grid\"/>\n"
        << "<text x=\"" << format_coord(kPlotLeft - 6) << "\" y=\"" << y
        << "\" class=\"tick\" text-anchor=\"end\">" << fixed(v, 2) << "</text>\n";
  }
}

void boxplot_svg(std::ostream& out, const BucketStats& stats, double lo, double hi) {
  const double width = kPlotLeft + kSlot * static_cast<double>(stats.buckets.size()) + 10;
  const double height = kPlotTop + kPlotHeight + 40;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_coord(width)
      << "\" height=\"" << format_coord(height) << "\" viewBox=\"0 0 " << format_coord(width)
      << ' ' << format_coord(height) << "\">\n";
  axis(out, lo, hi, width);
  for (std::size_t i = 0; i < stats.buckets.size(); ++i) {
    const Bucket& b = stats.buckets[i];
    const double cx = kPlotLeft + kSlot * (static_cast<double>(i) + 0.5);
    const std::string x = format_coord(cx);
    if (b.stats.defined > 0) {
      const BoxplotGeometry g = boxplot_geometry(b.stats, lo, hi, kPlotTop, kPlotHeight);
      const std::string left = format_coord(cx - 20), right = format_coord(cx + 20);
      const std::string cap_l = format_coord(cx - 10), cap_r = format_coord(cx + 10);
      out << "<g class=\"box\">"
          << "<line class=\"whisker\" x1=\"" << x << "\" y1=\"" << format_coord(g.whisker_high)
          << "\" x2=\"" << x << "\" y2=\"" << format_coord(g.q3) << "\"/>"
          << "<line class=\"whisker\" x1=\"" << x << "\" y1=\"" << format_coord(g.q1)
          << "\" x2=\"" << x << "\" y2=\"" << format_coord(g.whisker_low) << "\"/>"
          << "<line class=\"cap\" x1=\"" << cap_l << "\" y1=\"" << format_coord(g.whisker_high)
          << "\" x2=\"" << cap_r << "\" y2=\"" << format_coord(g.whisker_high) << "\"/>"
          << "<line class=\"cap\" x1=\"" << cap_l << "\" y1=\"" << format_coord(g.whisker_low)
          << "\" x2=\"" << cap_r << "\" y2=\"" << format_coord(g.whisker_low) << "\"/>"
          << "<rect x=\"" << left << "\" y=\"" << format_coord(g.q3) << "\" width=\"40.00\""
          << " height=\"" << format_coord(g.q1 - g.q3) << "\"/>"
          << "<line class=\"median\" x1=\"" << left << "\" y1=\"" << format_coord(g.median)
          << "\" x2=\"" << right << "\" y2=\"" << format_coord(g.median) << "\"/>"
          << "</g>\n";
    }
    out << "<text x=\"" << x << "\" y=\"" << format_coord(kPlotTop + kPlotHeight + 16)
        << "\" class=\"tick\" text-anchor=\"middle\">" << bucket_label(b) << "</text>\n"
        << "<text x=\"" << x << "\" y=\"" << format_coord(kPlotTop + kPlotHeight + 30)
        << "\" class=\"tick\" text-anchor=\"middle\">n=" << b.stats.count << "</text>\n";
  }
  out << "</svg>\n";
}

struct Series {
  std::string name;
  const std::vector<CopyRatePoint>* points;
};

void bar_chart_svg(std::ostream& out, const std::vector<Series>& series) {
  std::size_t groups = 0;
  for (const auto& s : series) groups = std::max(groups, s.points->size());
  const double width = kPlotLeft + kSlot * static_cast<double>(groups) + 10;
  const double height = kPlotTop + kPlotHeight + 40 + 16.0 * static_cast<double>(series.size());
  const double bar = (kSlot - 20) / static_cast<double>(std::max<std::size_t>(1, series.size()));
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_coord(width)
      << "\" height=\"" << format_coord(height) << "\" viewBox=\"0 0 " << format_coord(width)
      << ' ' << format_coord(height) << "\">\n";
  axis(out, 0, 1, width);
  for (std::size_t g = 0; g < groups; ++g) {
    const double gx = kPlotLeft + kSlot * static_cast<double>(g) + 10;
    std::size_t n = 0;
    for (std::size_t s = 0; s < series.size(); ++s) {
      if (g >= series[s].points->size()) continue;
      const CopyRatePoint& p = (*series[s].points)[g];
      n = p.n;
      if (!p.mean) continue;
      const double top = y_of(*p.mean, 0, 1);
      out << "<rect x=\"" << format_coord(gx + bar * static_cast<double>(s)) << "\" y=\""
          << format_coord(top) << "\" width=\"" << format_coord(bar) << "\" height=\""
          << format_coord(kPlotTop + kPlotHeight - top) << "\" fill=\""
          << kPalette[s % std::size(kPalette)] << "\"/>\n";
    }
    out << "<text x=\"" << format_coord(gx + (kSlot - 20) / 2) << "\" y=\""
        << format_coord(kPlotTop + kPlotHeight + 16)
        << "\" class=\"tick\" text-anchor=\"middle\">" << n << "-gram</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double y = kPlotTop + kPlotHeight + 32 + 16.0 * static_cast<double>(s);
    out << "<rect x=\"" << format_coord(kPlotLeft) << "\" y=\"" << format_coord(y - 9)
        << "\" width=\"10.00\" height=\"10.00\" fill=\"" << kPalette[s % std::size(kPalette)]
        << "\"/><text x=\"" << format_coord(kPlotLeft + 16) << "\" y=\"" << format_coord(y)
        << "\" class=\"tick\">" << escape(series[s].name) << "</text>\n";
  }
  out << "</svg>\n";
}

void bucket_table(std::ostream& out, const BucketStats& stats) {
  out << "<table><tr><th>source length</th><th>count</th><th>mean</th><th>std</th>"
         "<th>min</th><th>q1</th><th>median</th><th>q3</th><th>max</th></tr>\n";
  for (const auto& b : stats.buckets) {
    const BoxStats& s = b.stats;
    out << "<tr><td>" << bucket_label(b) << "</td><td>" << s.count << "</td><td>"
        << fixed(s.mean) << "</td><td>" << fixed(s.std) << "</td><td>" << fixed(s.min)
        << "</td><td>" << fixed(s.q1) << "</td><td>" << fixed(s.median) << "</td><td>"
        << fixed(s.q3) << "</td><td>" << fixed(s.max) << "</td></tr>\n";
  }
  out << "</table>\n";
}

void comparison_html(std::ostream& out, const Comparison& c) {
  out << "<h2>Comparison: " << escape(c.model_a) << " vs " << escape(c.model_b) << "</h2>\n"
      << "<table><tr><th>metric</th><th>" << escape(c.model_a) << "</th><th>"
      << escape(c.model_b) << "</th><th>delta</th></tr>\n";
  for (const auto& [name, d] : c.metrics)
    out << "<tr><td>" << escape(name) << "</td><td>" << fixed(d.corpus_a, 4) << "</td><td>"
        << fixed(d.corpus_b, 4) << "</td><td>" << fixed(d.delta, 4) << "</td></tr>\n";
  out << "</table>\n<h3>Per-sample wins on " << escape(c.bucket_metric) << "</h3>\n"
      << "<table><tr><th>source length</th><th>" << escape(c.model_a) << "</th><th>"
      << escape(c.model_b) << "</th><th>ties</th></tr>\n";
  for (std::size_t i = 0; i < c.per_bucket.size(); ++i) {
    const bool overflow = i + 1 == c.per_bucket.size();
    Bucket label;
    label.overflow = overflow;
    label.lo = overflow ? c.edges.back() : c.edges[i];
    label.hi = overflow ? 0 : c.edges[i + 1];
    const WinCounts& w = c.per_bucket[i];
    out << "<tr><td>" << bucket_label(label) << "</td><td>" << w.a << "</td><td>" << w.b
        << "</td><td>" << w.ties << "</td></tr>\n";
  }
  out << "<tr><td>all</td><td>" << c.overall.a << "</td><td>" << c.overall.b << "</td><td>"
      << c.overall.ties << "</td></tr>\n</table>\n";
  bar_chart_svg(out, {{c.model_a, &c.copy_a}, {c.model_b, &c.copy_b},
                      {"reference", &c.copy_reference}});
  out << "<p>Copying (copy rate above the reference at every n): " << escape(c.model_a)
      << " = " << (c.copying_a ? "yes" : "no") << ", " << escape(c.model_b) << " = "
      << (c.copying_b ? "yes" : "no") << "</p>\n";
}

std::string render_html(const AnalysisResults& r) {
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>"
      << escape(r.title) << "</title>\n<style>\n"
      << "body{font-family:sans-serif;margin:2em;color:#222}\n"
      << "table{border-collapse:collapse;margin:1em 0}\n"
      << "td,th{border:1px solid #ccc;padding:2px 8px;text-align:right}\n"
      << "svg .axis{stroke:#444}\nsvg .grid{stroke:#ddd}\n"
      << "svg .tick{font-size:10px;fill:#444}\n"
      << "svg .box rect{fill:#c6d4ea;stroke:#4c72b0}\n"
      << "svg .box line{stroke:#4c72b0}\nsvg .box .median{stroke:#c44e52;stroke-width:2}\n"
      << "</style>\n</head>\n<body>\n<h1>" << escape(r.title) << "</h1>\n";

  const std::string metric = r.metric.empty() ? "score" : escape(r.metric);
  out << "<h2>" << metric << " by source length</h2>\n";
  if (r.models.empty()) {
    out << "<p class=\"empty\">No data.</p>\n";
  } else {
    const auto [lo, hi] = value_range(r);
    for (const auto& m : r.models) {
      out << "<h3>" << escape(m.name) << "</h3>\n";
      boxplot_svg(out, m.buckets, lo, hi);
      bucket_table(out, m.buckets);
    }
  }

  out << "<h2>N-gram copy rate vs. source</h2>\n";
  std::vector<Series> series;
  for (const auto& m : r.models)
    if (!m.copy_rates.empty()) series.push_back({m.name, &m.copy_rates});
  if (!r.reference_copy_rates.empty()) series.push_back({"reference", &r.reference_copy_rates});
  if (series.empty()) {
    out << "<p class=\"empty\">No data.</p>\n";
  } else {
    bar_chart_svg(out, series);
    out << "<table><tr><th>series</th><th>n</th><th>copy rate</th><th>defined</th></tr>\n";
    for (const auto& s : series)
      for (const auto& p : *s.points)
        out << "<tr><td>" << escape(s.name) << "</td><td>" << p.n << "</td><td>"
            << fixed(p.mean) << "</td><td>" << p.defined << "</td></tr>\n";
    out << "</table>\n";
  }

  if (r.comparison) comparison_html(out, *r.comparison);
  out << "</body>\n</html>\n";
  return out.str();
}

}  // namespace

std::string format_coord(double value) {
  std::string s = fixed(value, 2);
  return s == "-0.00" ? "0.00" : s;
}

BoxplotGeometry boxplot_geometry(const BoxStats& stats, double lo, double hi, double top,
                                 double height) {
  if (stats.defined == 0) throw ArgumentError("boxplot of an empty bucket");
  if (!(hi > lo)) throw ArgumentError("boxplot range must have hi > lo");
  const auto y = [&](double v) { return top + height * (1.0 - (v - lo) / (hi - lo)); };
  return {y(*stats.min), y(*stats.q1), y(*stats.median), y(*stats.q3), y(*stats.max)};
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "html") return ReportFormat::html;
  throw ConfigError("unknown report format '" + std::string(name) + "' (json, html)");
}

std::string render_report(const AnalysisResults& results, ReportFormat format) {
  if (format == ReportFormat::json) return results_json(results).dump(2) + "\n";
  return render_html(results);
}

}  // namespace genforge
