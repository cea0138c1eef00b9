// SPDX-License-Identifier: Apache-2.0
#include "chart.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>

#include "megtext/error.hpp"

namespace megtext::cli {

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
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

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

void write_sweep_csv(const std::filesystem::path& path, const std::vector<train::SweepRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "setting,bleu1,effective_epochs,error\n";
  for (const auto& r : rows)
    out << csv_field(r.setting) << ',' << fmt::format("{:.9g}", r.bleu1) << ',' << r.effective_epochs << ','
        << csv_field(r.error) << '\n';
}

std::string render_chart(const ChartSpec& spec, const std::vector<train::SweepRow>& rows, const std::string& csv_name) {
  constexpr double width = 640, height = 400, left = 70, right = 20, top = 50, bottom = 90;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  double y_max = 100.0;
  for (const auto& r : rows) y_max = std::max(y_max, r.bleu1);
  const std::size_t n = rows.size();
  auto x_at = [&](std::size_t i) { return left + plot_w * (static_cast<double>(i) + 0.5) / static_cast<double>(std::max<std::size_t>(n, 1)); };
  auto y_at = [&](double v) { return top + plot_h * (1.0 - v / y_max); };

  std::string svg;
  svg += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" data-source=\"{}\">\n", width,
                     height, escape_xml(csv_name));
  svg += fmt::format("<title>{} (data: {})</title>\n", escape_xml(spec.title), escape_xml(csv_name));
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += fmt::format("<text x=\"{}\" y=\"28\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n", width / 2,
                     escape_xml(spec.title));
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", left, top, top + plot_h);
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", left, top + plot_h,
                     left + plot_w);
  for (int t = 0; t <= 4; ++t) {
    const double v = y_max * t / 4.0;
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{:.0f}</text>\n", left - 6,
                       y_at(v) + 4, v);
    svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#ddd\"/>\n", left, y_at(v),
                       left + plot_w);
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n", left + plot_w / 2,
                     height - 14, escape_xml(spec.x_label));
  svg += fmt::format(
      "<text x=\"18\" y=\"{0}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
      top + plot_h / 2, escape_xml(spec.y_label));

  std::string polyline;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i];
    const double x = x_at(i);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n", x,
                       top + plot_h + 16, escape_xml(r.setting));
    if (!r.error.empty()) {
      svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"red\" text-anchor=\"middle\">failed</text>\n",
                         x, top + plot_h - 6);
      continue;
    }
    const double y = y_at(r.bleu1);
    if (spec.bars) {
      const double bw = plot_w / static_cast<double>(n) * 0.6;
      svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#4a7ebb\"/>\n", x - bw / 2, y, bw,
                         top + plot_h - y);
    } else {
      svg += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"#4a7ebb\"/>\n", x, y);
      polyline += fmt::format("{},{} ", x, y);
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{:.2f}</text>\n", x, y - 8,
                       r.bleu1);
    if (spec.annotate_epochs)
      svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"green\" text-anchor=\"middle\">{}</text>\n", x,
                         y - 22, r.effective_epochs);
  }
  if (!polyline.empty())
    svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"#4a7ebb\" stroke-width=\"2\"/>\n", polyline);
  svg += "</svg>\n";
  return svg;
}

}  // namespace megtext::cli
