#include "voi/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "voi/csv.hpp"

namespace voi {

namespace {

std::string coord(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#17becf", "#7f7f7f"};

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log_scale = false;
  double px_lo = 0.0, px_hi = 1.0;

  double to_px(double v) const {
    double t;
    if (log_scale) {
      t = (std::log(v) - std::log(lo)) / (std::log(hi) - std::log(lo));
    } else {
      t = (v - lo) / (hi - lo);
    }
    return px_lo + t * (px_hi - px_lo);
  }
};

void axis_ticks(std::stringstream& out, const Axis& axis, bool vertical, double cross_px) {
  for (int i = 0; i <= 4; ++i) {
    const double t = i / 4.0;
    const double v = axis.log_scale
                         ? std::exp(std::log(axis.lo) + t * (std::log(axis.hi) - std::log(axis.lo)))
                         : axis.lo + t * (axis.hi - axis.lo);
    const double px = axis.to_px(v);
    char label[32];
    std::snprintf(label, sizeof(label), "%.3g", v);
    if (vertical) {
      out << "<line x1='" << coord(cross_px - 4) << "' y1='" << coord(px) << "' x2='"
          << coord(cross_px) << "' y2='" << coord(px) << "' stroke='#333'/>\n";
      out << "<text x='" << coord(cross_px - 8) << "' y='" << coord(px + 3)
          << "' font-size='9' text-anchor='end'>" << label << "</text>\n";
    } else {
      out << "<line x1='" << coord(px) << "' y1='" << coord(cross_px) << "' x2='" << coord(px)
          << "' y2='" << coord(cross_px + 4) << "' stroke='#333'/>\n";
      out << "<text x='" << coord(px) << "' y='" << coord(cross_px + 16)
          << "' font-size='9' text-anchor='middle'>" << label << "</text>\n";
    }
  }
}

}  // namespace

std::string render_evoir_scatter(const std::vector<VoiTableRow>& rows, const std::string& target,
                                 const PlotOptions& options) {
  std::vector<VoiTableRow> defined, undefined;
  for (const VoiTableRow& row : rows) {
    if (row.target != target) continue;
    (row.evoir_defined ? defined : undefined).push_back(row);
  }

  const double width = 820, height = 520;
  const double left = 70, right = 600, top = 50, bottom = 470;

  std::stringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' viewBox='0 0 " << width << " " << height << "'>\n";
  out << "<!-- voikit scatter: expected value of information ratio vs prospective value -->\n";
  for (const VoiTableRow& row : defined) {
    out << "<!-- data: " << row.partition << "," << row.target << ",rvsi=" << format_number(row.rvsi)
        << ",pvsi=" << format_number(row.pvsi) << ",evoir=" << format_number(row.evoir) << " -->\n";
  }
  out << "<rect width='" << width << "' height='" << height << "' fill='white'/>\n";
  out << "<text x='" << coord(left) << "' y='24' font-size='14'>EVOIR vs PVSI - target "
      << target << "</text>\n";

  if (defined.empty()) {
    out << "<text x='" << coord(left) << "' y='" << coord(top + 40)
        << "' font-size='11'>no rows with defined EVOIR</text>\n";
  } else {
    double max_pvsi = 0.0, max_evoir = 0.0, min_pvsi = 1e300, min_evoir = 1e300;
    for (const VoiTableRow& row : defined) {
      max_pvsi = std::max(max_pvsi, row.pvsi);
      max_evoir = std::max(max_evoir, row.evoir);
      if (row.pvsi > 0) min_pvsi = std::min(min_pvsi, row.pvsi);
      if (row.evoir > 0) min_evoir = std::min(min_evoir, row.evoir);
    }
    Axis x{options.log_x ? min_pvsi / 2 : 0.0, max_pvsi * 1.15, options.log_x, left, right};
    Axis y{options.log_y ? min_evoir / 2 : 0.0, std::max(max_evoir, 1.2) * 1.15, options.log_y,
           bottom, top};

    // frame and ticks
    out << "<line x1='" << coord(left) << "' y1='" << coord(bottom) << "' x2='" << coord(right)
        << "' y2='" << coord(bottom) << "' stroke='#333'/>\n";
    out << "<line x1='" << coord(left) << "' y1='" << coord(bottom) << "' x2='" << coord(left)
        << "' y2='" << coord(top) << "' stroke='#333'/>\n";
    axis_ticks(out, x, false, bottom);
    axis_ticks(out, y, true, left);
    out << "<text x='" << coord((left + right) / 2) << "' y='" << coord(bottom + 34)
        << "' font-size='11' text-anchor='middle'>PVSI</text>\n";
    out << "<text x='18' y='" << coord((top + bottom) / 2)
        << "' font-size='11' transform='rotate(-90 18 " << coord((top + bottom) / 2)
        << ")' text-anchor='middle'>EVOIR</text>\n";

    // mean-one reference line
    if (1.0 > y.lo && 1.0 < y.hi) {
      out << "<line x1='" << coord(left) << "' y1='" << coord(y.to_px(1.0)) << "' x2='"
          << coord(right) << "' y2='" << coord(y.to_px(1.0))
          << "' stroke='#999' stroke-dasharray='5,4'/>\n";
    }

    // RVSI contours: hyperbolas evoir = c / pvsi at the observed quartiles
    std::vector<double> rvsis;
    for (const VoiTableRow& row : defined) {
      if (row.rvsi > 0) rvsis.push_back(row.rvsi);
    }
    std::sort(rvsis.begin(), rvsis.end());
    std::set<double> levels;
    if (!rvsis.empty()) {
      for (double q : {0.25, 0.5, 0.75}) {
        levels.insert(rvsis[static_cast<std::size_t>(q * (rvsis.size() - 1))]);
      }
    }
    for (double level : levels) {
      out << "<path d='";
      bool started = false;
      for (int i = 0; i <= 160; ++i) {
        const double px = left + (right - left) * i / 160.0;
        double v;
        if (x.log_scale) {
          v = std::exp(std::log(x.lo) +
                       (px - left) / (right - left) * (std::log(x.hi) - std::log(x.lo)));
        } else {
          v = x.lo + (px - left) / (right - left) * (x.hi - x.lo);
        }
        if (!(v > 0.0)) continue;
        const double e = level / v;
        if (e < y.lo || e > y.hi) {
          started = false;
          continue;
        }
        out << (started ? "L" : "M") << coord(px) << " " << coord(y.to_px(e));
        started = true;
      }
      out << "' fill='none' stroke='#bbb' stroke-width='1'/>\n";
      char label[48];
      std::snprintf(label, sizeof(label), "RVSI=%.3g", level);
      const double label_x = x.to_px(x.log_scale ? x.hi / 1.5 : x.hi * 0.8);
      const double e_at = level / (x.log_scale ? x.hi / 1.5 : x.hi * 0.8);
      if (e_at > y.lo && e_at < y.hi) {
        out << "<text x='" << coord(label_x) << "' y='" << coord(y.to_px(e_at) - 3)
            << "' font-size='8' fill='#888'>" << label << "</text>\n";
      }
    }

    int color = 0;
    for (const VoiTableRow& row : defined) {
      const double px = x.to_px(row.pvsi), py = y.to_px(row.evoir);
      out << "<circle cx='" << coord(px) << "' cy='" << coord(py) << "' r='4' fill='"
          << kPalette[color % 9] << "'/>\n";
      out << "<text x='" << coord(px + 6) << "' y='" << coord(py - 5) << "' font-size='9'>"
          << row.partition << "</text>\n";
      color += 1;
    }
  }

  // flagged side panel for undefined ratios
  out << "<text x='620' y='" << coord(top) << "' font-size='11'>undefined EVOIR</text>\n";
  if (undefined.empty()) {
    out << "<text x='620' y='" << coord(top + 18) << "' font-size='9' fill='#888'>none</text>\n";
  } else {
    double row_y = top + 18;
    for (const VoiTableRow& row : undefined) {
      out << "<text x='620' y='" << coord(row_y) << "' font-size='9' fill='#a00'>" << row.partition
          << " (rvsi=" << format_number(row.rvsi) << ")</text>\n";
      row_y += 14;
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_prevalence_curves(const std::vector<PrevalencePoint>& points) {
  // group points: partition -> site -> (year, prevalence)
  std::vector<std::string> partitions;
  std::map<std::string, std::map<int, std::map<int, double>>> grouped;
  std::set<int> years;
  double max_prev = 0.0;
  for (const PrevalencePoint& pt : points) {
    if (!grouped.count(pt.partition)) partitions.push_back(pt.partition);
    grouped[pt.partition][pt.site][pt.year] = pt.prevalence;
    years.insert(pt.year);
    max_prev = std::max(max_prev, pt.prevalence);
  }
  std::stable_sort(partitions.begin(), partitions.end(),
                   [](const std::string& a, const std::string& b) {
                     const bool fa = a == "full", fb = b == "full";
                     if (fa != fb) return fa;
                     return a < b;
                   });

  const int cols = 3;
  const double panel_w = 240, panel_h = 170, margin = 20;
  const int rows_count =
      partitions.empty() ? 1 : (static_cast<int>(partitions.size()) + cols - 1) / cols;
  const double width = cols * (panel_w + margin) + margin;
  const double height = rows_count * (panel_h + margin) + margin + 20;

  std::stringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' viewBox='0 0 " << width << " " << height << "'>\n";
  out << "<!-- voikit prevalence curves per leave-one-out fit -->\n";
  out << "<rect width='" << width << "' height='" << height << "' fill='white'/>\n";
  if (partitions.empty()) {
    out << "<text x='20' y='30' font-size='11'>no prevalence rows</text>\n";
    out << "</svg>\n";
    return out.str();
  }

  const int year_lo = *years.begin(), year_hi = *years.rbegin();
  for (std::size_t pi = 0; pi < partitions.size(); ++pi) {
    const double ox = margin + (pi % cols) * (panel_w + margin);
    const double oy = 20 + margin + (pi / cols) * (panel_h + margin);
    out << "<rect x='" << coord(ox) << "' y='" << coord(oy) << "' width='" << panel_w
        << "' height='" << panel_h << "' fill='none' stroke='#ccc'/>\n";
    out << "<text x='" << coord(ox + 4) << "' y='" << coord(oy - 4) << "' font-size='10'>"
        << partitions[pi] << "</text>\n";
    const auto& sites = grouped[partitions[pi]];
    int color = 0;
    for (const auto& [site, series] : sites) {
      out << "<path d='";
      bool started = false;
      for (const auto& [year, prev] : series) {
        const double px =
            year_hi == year_lo
                ? ox + panel_w / 2
                : ox + 8 + (panel_w - 16) * (year - year_lo) / static_cast<double>(year_hi - year_lo);
        const double py = oy + panel_h - 8 - (panel_h - 20) * (max_prev > 0 ? prev / (1.1 * max_prev) : 0.0);
        out << (started ? "L" : "M") << coord(px) << " " << coord(py);
        started = true;
      }
      out << "' fill='none' stroke='" << kPalette[color % 9] << "' stroke-width='1'/>\n";
      color += 1;
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace voi
