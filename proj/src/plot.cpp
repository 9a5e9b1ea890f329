#include "uniac/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace uniac {

RunLog read_run_dir(const std::string& dir) {
  if (!std::filesystem::is_directory(dir))
    throw ContractViolation("emit_plots: run directory not found: '" + dir + "'");
  const std::string summary_path = dir + "/summary.json";
  std::ifstream in(summary_path);
  if (!in)
    throw ContractViolation("emit_plots: missing summary file: '" +
                            summary_path + "'");
  nlohmann::json j;
  in >> j;
  RunLog log;
  log.dir = dir;
  log.name = j.at("name").get<std::string>();
  log.env = j.at("env").get<std::string>();
  log.seed = j.at("seed").get<std::uint64_t>();
  log.records = read_log_csv(dir + "/log.csv");
  return log;
}

namespace {

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Series {
  std::vector<std::size_t> steps;
  std::vector<double> mean, lo, hi;
};

// Pointwise mean +- std across seeds, aligned on the step grid of the first
// run (runs of one cell share eval_interval).
Series aggregate(const std::vector<const RunLog*>& runs) {
  Series s;
  const std::size_t n = runs[0]->records.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t step = runs[0]->records[i].step;
    double mu = 0.0;
    std::size_t count = 0;
    for (const RunLog* r : runs) {
      if (i >= r->records.size() || r->records[i].step != step) continue;
      mu += r->records[i].episode_return_mean;
      ++count;
    }
    if (count == 0) continue;
    mu /= double(count);
    double var = 0.0;
    for (const RunLog* r : runs) {
      if (i >= r->records.size() || r->records[i].step != step) continue;
      const double d = r->records[i].episode_return_mean - mu;
      var += d * d;
    }
    const double sd = std::sqrt(var / double(count));
    s.steps.push_back(step);
    s.mean.push_back(mu);
    s.lo.push_back(mu - sd);
    s.hi.push_back(mu + sd);
  }
  return s;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

void write_env_svg(const std::string& path, const std::string& env,
                   const std::map<std::string, Series>& by_name) {
  const double width = 720, height = 480;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (auto& [name, s] : by_name) {
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
      xmin = std::min(xmin, double(s.steps[i]));
      xmax = std::max(xmax, double(s.steps[i]));
      ymin = std::min(ymin, s.lo[i]);
      ymax = std::max(ymax, s.hi[i]);
    }
  }
  if (xmin > xmax) { xmin = 0; xmax = 1; }
  if (ymin > ymax) { ymin = 0; ymax = 1; }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto X = [&](double v) {
    return ml + (v - xmin) / (xmax - xmin) * (width - ml - mr);
  };
  auto Y = [&](double v) {
    return height - mb - (v - ymin) / (ymax - ymin) * (height - mt - mb);
  };

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << width / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='16'>" << env << "</text>\n";
  // axes
  svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
      << height - mb << "' stroke='black'/>\n";
  svg << "<line x1='" << ml << "' y1='" << height - mb << "' x2='"
      << width - mr << "' y2='" << height - mb << "' stroke='black'/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 5.0;
    const double yv = ymin + (ymax - ymin) * k / 5.0;
    svg << "<text x='" << f2(X(xv)) << "' y='" << height - mb + 18
        << "' text-anchor='middle' font-family='sans-serif' font-size='11'>"
        << std::size_t(xv) << "</text>\n";
    svg << "<text x='" << ml - 6 << "' y='" << f2(Y(yv) + 4)
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>"
        << f2(yv) << "</text>\n";
    svg << "<line x1='" << ml << "' y1='" << f2(Y(yv)) << "' x2='"
        << width - mr << "' y2='" << f2(Y(yv))
        << "' stroke='#dddddd' stroke-width='0.5'/>\n";
  }
  svg << "<text x='" << width / 2 << "' y='" << height - 12
      << "' text-anchor='middle' font-family='sans-serif' font-size='12'>"
      << "environment steps</text>\n";
  svg << "<text x='18' y='" << height / 2
      << "' font-family='sans-serif' font-size='12' transform='rotate(-90 18 "
      << height / 2 << ")' text-anchor='middle'>eval return</text>\n";

  std::size_t color = 0;
  double legend_y = mt + 8;
  for (auto& [name, s] : by_name) {
    const char* c = kPalette[color % (sizeof kPalette / sizeof *kPalette)];
    ++color;
    if (s.steps.size() > 1) {
      std::ostringstream band;
      for (std::size_t i = 0; i < s.steps.size(); ++i)
        band << f2(X(double(s.steps[i]))) << "," << f2(Y(s.hi[i])) << " ";
      for (std::size_t i = s.steps.size(); i-- > 0;)
        band << f2(X(double(s.steps[i]))) << "," << f2(Y(s.lo[i])) << " ";
      svg << "<polygon points='" << band.str() << "' fill='" << c
          << "' fill-opacity='0.18' stroke='none'/>\n";
    }
    svg << "<polyline fill='none' stroke='" << c << "' stroke-width='1.8' points='";
    for (std::size_t i = 0; i < s.steps.size(); ++i)
      svg << f2(X(double(s.steps[i]))) << "," << f2(Y(s.mean[i])) << " ";
    svg << "'/>\n";
    svg << "<rect x='" << width - mr - 190 << "' y='" << legend_y - 9
        << "' width='14' height='4' fill='" << c << "'/>\n";
    svg << "<text x='" << width - mr - 172 << "' y='" << legend_y
        << "' font-family='sans-serif' font-size='11'>" << name << "</text>\n";
    legend_y += 16;
  }
  svg << "</svg>\n";

  std::ofstream out(path);
  out << svg.str();
}

}  // namespace

std::vector<std::string> emit_plots(const std::vector<std::string>& run_dirs,
                                    const std::string& out_dir) {
  std::vector<RunLog> logs;
  logs.reserve(run_dirs.size());
  for (const std::string& d : run_dirs) logs.push_back(read_run_dir(d));
  std::filesystem::create_directories(out_dir);

  // env -> name -> runs
  std::map<std::string, std::map<std::string, std::vector<const RunLog*>>> groups;
  for (const RunLog& l : logs) groups[l.env][l.name].push_back(&l);

  std::vector<std::string> written;
  std::ostringstream table;
  table << "| environment | config | final return (mean +- std over seeds) | seeds |\n";
  table << "|---|---|---|---|\n";
  for (auto& [env, by_name] : groups) {
    std::map<std::string, Series> series;
    for (auto& [name, runs] : by_name) {
      series[name] = aggregate(runs);
      double mu = 0.0;
      for (const RunLog* r : runs)
        mu += r->records.empty() ? 0.0
                                 : r->records.back().episode_return_mean;
      mu /= double(runs.size());
      double var = 0.0;
      for (const RunLog* r : runs) {
        const double v =
            r->records.empty() ? 0.0 : r->records.back().episode_return_mean;
        var += (v - mu) * (v - mu);
      }
      const double sd = std::sqrt(var / double(runs.size()));
      table << "| " << env << " | " << name << " | " << f2(mu) << " +- "
            << f2(sd) << " | " << runs.size() << " |\n";
    }
    const std::string svg_path = out_dir + "/curves_" + env + ".svg";
    write_env_svg(svg_path, env, series);
    written.push_back(svg_path);
  }
  const std::string table_path = out_dir + "/summary.md";
  std::ofstream tf(table_path);
  tf << table.str();
  written.push_back(table_path);
  return written;
}

}  // namespace uniac
