#include "lloss_cli/report.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lloss_cli/svg.hpp"

namespace lloss::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s, const fs::path& file) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ReportError(file.string() + ": bad number '" + s + "'");
  return v;
}

std::size_t to_size(const std::string& s, const fs::path& file) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ReportError(file.string() + ": bad integer '" + s + "'");
  }
  return std::stoull(s);
}

std::vector<std::vector<std::string>> read_rows(const fs::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw ReportError("missing " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) throw ReportError(path.string() + ": unexpected header");
  const std::size_t cols = split(header, ',').size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    auto cells = split(line, ',');
    if (cells.size() != cols) throw ReportError(path.string() + ": malformed row '" + line + "'");
    rows.push_back(std::move(cells));
  }
  return rows;
}

json read_manifest(const fs::path& run_dir) {
  std::ifstream in(run_dir / "manifest.json");
  if (!in) throw ReportError("missing " + (run_dir / "manifest.json").string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ReportError("unreadable manifest: " + std::string(e.what()));
  }
}

struct Metric {
  const char* key;
  double CycleRecord::* field;
  std::string label;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw ReportError("cannot write " + path.string());
}

}  // namespace

std::vector<CycleRecord> read_trial_csv(const fs::path& path) {
  std::vector<CycleRecord> records;
  for (const auto& c : read_rows(path, "stage,labeled_size,test_metric,ranking_accuracy,pearson,seconds,selected_ids")) {
    CycleRecord r;
    r.stage = to_size(c[0], path);
    r.labeled_size = to_size(c[1], path);
    r.test_metric = to_double(c[2], path);
    r.ranking_accuracy = to_double(c[3], path);
    r.pearson = to_double(c[4], path);
    r.seconds = to_double(c[5], path);
    if (!c[6].empty()) {
      for (const auto& id : split(c[6], ';')) r.selected_ids.push_back(to_size(id, path));
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw ReportError(path.string() + ": no cycles recorded");
  return records;
}

LossSnapshot read_losses_csv(const fs::path& path) {
  LossSnapshot snap;
  const auto rows = read_rows(path, "id,real_loss,predicted_loss,entropy");
  for (const auto& c : rows) {
    snap.ids.push_back(to_size(c[0], path));
    snap.real.push_back(to_double(c[1], path));
    snap.predicted.push_back(to_double(c[2], path));
    if (!c[3].empty()) snap.entropy.push_back(to_double(c[3], path));
  }
  if (!snap.entropy.empty() && snap.entropy.size() != snap.ids.size()) {
    throw ReportError(path.string() + ": entropy column is partially filled");
  }
  return snap;
}

ReportFiles write_report(const fs::path& run_dir) {
  const json manifest = read_manifest(run_dir);
  if (manifest.value("status", "") != "complete") throw ReportError("run in " + run_dir.string() + " is not complete");
  const bool classification = manifest.value("task", "") == "classification";

  std::vector<StrategyResult> results;
  try {
    for (const auto& s : manifest.at("strategies")) {
      StrategyResult r;
      r.strategy.kind = parse_strategy(s.at("name").get<std::string>());
      for (const auto& t : s.at("trials")) {
        TrialResult trial;
        trial.records = read_trial_csv(run_dir / t.at("csv").get<std::string>());
        trial.final_losses = read_losses_csv(run_dir / t.at("losses").get<std::string>());
        r.trials.push_back(std::move(trial));
      }
      if (r.trials.empty()) throw ReportError("strategy " + r.strategy.name() + " has no trials");
      results.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ReportError("malformed manifest: " + std::string(e.what()));
  } catch (const ValueError& e) {
    throw ReportError(e.what());
  }
  if (results.empty()) throw ReportError("manifest lists no strategies");

  const fs::path out_dir = run_dir / "report";
  fs::create_directories(out_dir);
  ReportFiles files;

  const Metric metrics[] = {
      {"test_metric", &CycleRecord::test_metric, classification ? "test accuracy" : "test MSE"},
      {"ranking_accuracy", &CycleRecord::ranking_accuracy, "loss ranking accuracy"},
      {"pearson", &CycleRecord::pearson, "Pearson(predicted, real loss)"},
  };
  for (const auto& m : metrics) {
    std::vector<CurveSeries> series;
    std::ostringstream csv;
    csv << "strategy,stage,labeled_size,mean,std\n";
    for (const auto& r : results) {
      std::vector<SummaryRow> rows;
      try {
        rows = summarize(r.trials, m.field);
      } catch (const ValueError& e) {
        throw ReportError(r.strategy.name() + ": " + e.what());
      }
      CurveSeries s{r.strategy.name(), {}, {}, {}};
      for (const auto& row : rows) {
        s.x.push_back(row.labeled_size);
        s.mean.push_back(row.mean);
        s.std.push_back(row.std);
        csv << s.label << ',' << row.stage << ',' << format_real(row.labeled_size) << ',' << format_real(row.mean)
            << ',' << format_real(row.std) << '\n';
      }
      series.push_back(std::move(s));
    }
    const fs::path svg = out_dir / (std::string(m.key) + ".svg");
    const fs::path table = out_dir / ("summary_" + std::string(m.key) + ".csv");
    write_text(svg, render_curves(m.label, "labeled samples", m.label, series));
    write_text(table, csv.str());
    files.curves.push_back(svg);
    files.summaries.push_back(table);
  }

  for (const auto& r : results) {
    const LossSnapshot& snap = r.trials.front().final_losses;
    std::vector<ScatterSeries> panels{{"predicted loss", snap.real, snap.predicted}};
    if (!snap.entropy.empty()) panels.push_back({"entropy", snap.real, snap.entropy});
    const fs::path svg = out_dir / ("scatter_" + r.strategy.name() + ".svg");
    write_text(svg, render_scatter(r.strategy.name() + ": final cycle, trial 0", "real loss", panels));
    files.scatters.push_back(svg);
  }
  return files;
}

}  // namespace lloss::cli
