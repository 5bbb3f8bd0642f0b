#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "tinycompress/bench.hpp"
#include "tinycompress/errors.hpp"

namespace tc::bench {

namespace {

// Shortest representation that round-trips.
std::string full(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string one_decimal(double v) {
  char buf[32];
  double r = round1(v);
  if (r == 0.0) r = 0.0;  // no "-0.0"
  std::snprintf(buf, sizeof(buf), "%.1f", r);
  return buf;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<const ReportRow*> rows_of(const GridReport& report, const compress::Pipeline& p) {
  std::vector<const ReportRow*> out;
  for (const auto& r : report.rows)
    if (r.pipeline == p) out.push_back(&r);
  return out;
}

std::string status_of(const ReportRow& r) { return r.ok ? "ok" : "failed: " + r.error; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

}  // namespace

void write_pipeline_csv(std::ostream& out, const GridReport& report, const compress::Pipeline& p) {
  out << "fault,baseline_size_bytes,baseline_acc,compressed_size_bytes,compressed_acc,compressed_rate,acc_change,"
         "status\n";
  for (const auto* r : rows_of(report, p)) {
    out << r->fault << ',';
    if (r->ok)
      out << r->baseline_size << ',' << full(r->baseline_acc) << ',' << r->compressed_size << ','
          << full(r->compressed_acc) << ',' << full(r->compressed_rate) << ',' << full(r->acc_change);
    else
      out << ",,,,,";
    out << ',' << csv_field(status_of(*r)) << '\n';
  }
}

void write_pipeline_markdown(std::ostream& out, const GridReport& report, const compress::Pipeline& p) {
  out << "## " << p.name() << "\n\n";
  out << "| Fault | Baseline Size (bytes) | Baseline Acc (%) | Compressed Size (bytes) | Compressed Acc (%) | "
         "Compressed Rate (%) | Acc Change (%) | Status |\n";
  out << "|---:|---:|---:|---:|---:|---:|---:|:---|\n";
  for (const auto* r : rows_of(report, p)) {
    if (r->ok)
      out << "| " << r->fault << " | " << r->baseline_size << " | " << one_decimal(r->baseline_acc) << " | "
          << r->compressed_size << " | " << one_decimal(r->compressed_acc) << " | "
          << one_decimal(r->compressed_rate) << " | " << one_decimal(r->acc_change) << " | ok |\n";
    else
      out << "| " << r->fault << " | | | | | | | " << md_cell(status_of(*r)) << " |\n";
  }
  if (const auto* agg = report.find(p)) {
    double base_size = 0.0, comp_size = 0.0;
    std::size_t n = 0;
    for (const auto* r : rows_of(report, p))
      if (r->ok) {
        base_size += static_cast<double>(r->baseline_size);
        comp_size += static_cast<double>(r->compressed_size);
        ++n;
      }
    if (n > 0)
      out << "| Average | " << one_decimal(base_size / n) << " | " << one_decimal(agg->mean_baseline_acc) << " | "
          << one_decimal(comp_size / n) << " | " << one_decimal(agg->mean_compressed_acc) << " | "
          << one_decimal(agg->mean_rate) << " | " << one_decimal(agg->mean_acc_change) << " | "
          << (agg->failed == 0 ? "ok" : std::to_string(agg->failed) + " failed") << " |\n";
  }
}

void write_summary_csv(std::ostream& out, const GridReport& report) {
  out << "pipeline,cells,failed,mean_rate,var_rate,mean_acc_change,var_acc_change,mean_baseline_acc,"
         "mean_compressed_acc\n";
  for (const auto& a : report.aggregates)
    out << a.pipeline.name() << ',' << a.cells << ',' << a.failed << ',' << full(a.mean_rate) << ','
        << full(a.var_rate) << ',' << full(a.mean_acc_change) << ',' << full(a.var_acc_change) << ','
        << full(a.mean_baseline_acc) << ',' << full(a.mean_compressed_acc) << '\n';
}

void write_summary_svg(std::ostream& out, const GridReport& report) {
  static constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                            "#9467bd", "#8c564b", "#e377c2"};
  constexpr double W = 960, H = 420, pad = 50, panel = 400, gap = 80;

  std::vector<int> faults;
  for (const auto& r : report.rows)
    if (std::find(faults.begin(), faults.end(), r.fault) == faults.end()) faults.push_back(r.fault);
  std::sort(faults.begin(), faults.end());

  auto x_of = [&](std::size_t i) {
    return pad + (faults.size() <= 1 ? panel / 2 : panel * static_cast<double>(i) / (faults.size() - 1));
  };
  auto y_of = [&](double pct) { return H - pad - (H - 2 * pad) * std::clamp(pct, 0.0, 100.0) / 100.0; };

  char buf[160];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Left panel: compressed rate per fault.
  out << "<g id=\"rate-panel\">\n";
  out << "<text x=\"" << pad << "\" y=\"20\">Compressed rate (%) by fault</text>\n";
  std::snprintf(buf, sizeof(buf), "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", pad, H - pad,
                pad + panel, H - pad);
  out << buf;
  std::snprintf(buf, sizeof(buf), "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", pad, pad, pad,
                H - pad);
  out << buf;
  for (int tick = 0; tick <= 100; tick += 20) {
    std::snprintf(buf, sizeof(buf), "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%d</text>\n", pad - 4,
                  y_of(tick) + 4, tick);
    out << buf;
  }
  for (std::size_t i = 0; i < faults.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%d</text>\n", x_of(i),
                  H - pad + 14, faults[i]);
    out << buf;
  }
  std::size_t series = 0;
  for (const auto& agg : report.aggregates) {
    const char* color = kColors[series % 7];
    out << "<g class=\"series\" data-pipeline=\"" << agg.pipeline.name() << "\" stroke=\"" << color
        << "\" fill=\"none\">\n<polyline points=\"";
    for (std::size_t i = 0; i < faults.size(); ++i)
      for (const auto& r : report.rows)
        if (r.fault == faults[i] && r.pipeline == agg.pipeline && r.ok) {
          std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", x_of(i), y_of(r.compressed_rate));
          out << buf;
        }
    out << "\"/>\n";
    std::snprintf(buf, sizeof(buf), "<text x=\"%g\" y=\"%g\" fill=\"%s\" stroke=\"none\">%s</text>\n",
                  pad + panel + 8, pad + 14.0 * static_cast<double>(series), color, agg.pipeline.name().c_str());
    out << buf << "</g>\n";
    ++series;
  }
  out << "</g>\n";

  // Right panel: mean accuracy per pipeline.
  const double left = pad + panel + gap;
  const double bar_w = (W - left - pad) / std::max<std::size_t>(1, report.aggregates.size());
  out << "<g id=\"accuracy-panel\">\n";
  out << "<text x=\"" << left << "\" y=\"20\">Mean accuracy (%) by pipeline</text>\n";
  std::snprintf(buf, sizeof(buf), "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", left, H - pad,
                W - pad, H - pad);
  out << buf;
  series = 0;
  for (const auto& agg : report.aggregates) {
    const double x = left + bar_w * static_cast<double>(series);
    const double y = y_of(agg.mean_compressed_acc);
    std::snprintf(buf, sizeof(buf),
                  "<rect class=\"bar\" x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
                  x + 4, y, bar_w - 8, H - pad - y, kColors[series % 7]);
    out << buf;
    std::snprintf(buf, sizeof(buf), "<text x=\"%.2f\" y=\"%g\" text-anchor=\"middle\">%s</text>\n", x + bar_w / 2,
                  H - pad + 14, agg.pipeline.name().c_str());
    out << buf;
    std::snprintf(buf, sizeof(buf), "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%s</text>\n",
                  x + bar_w / 2, y - 4, one_decimal(agg.mean_compressed_acc).c_str());
    out << buf;
    ++series;
  }
  out << "</g>\n</svg>\n";
}

std::vector<std::filesystem::path> emit_report(const GridReport& report, ReportFormat format,
                                               const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    written.push_back(path);
    return out;
  };
  switch (format) {
    case ReportFormat::csv:
      for (const auto& a : report.aggregates) {
        auto out = open(dir / ("report_" + lower(a.pipeline.name()) + ".csv"));
        write_pipeline_csv(out, report, a.pipeline);
      }
      {
        auto out = open(dir / "summary.csv");
        write_summary_csv(out, report);
      }
      break;
    case ReportFormat::markdown:
      for (const auto& a : report.aggregates) {
        auto out = open(dir / ("report_" + lower(a.pipeline.name()) + ".md"));
        write_pipeline_markdown(out, report, a.pipeline);
      }
      break;
    case ReportFormat::svg: {
      auto out = open(dir / "summary.svg");
      write_summary_svg(out, report);
      break;
    }
  }
  return written;
}

}  // namespace tc::bench
