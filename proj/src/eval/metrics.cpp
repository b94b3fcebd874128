#include "newshub/eval/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "newshub/error.hpp"

namespace newshub::eval {

using nlohmann::json;

namespace {

constexpr const char* kReportSchema = "newshub-report";
constexpr int kReportVersion = 1;

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string bold_if(bool flag, const std::string& s) { return flag ? "**" + s + "**" : s; }

// Round half up without going through floating point.
std::size_t whole_percent(std::size_t part, std::size_t total) { return (200 * part + total) / (2 * total); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred) {
  if (y_true.size() != y_pred.size())
    throw Error(Errc::input, "label vectors differ in length (" + std::to_string(y_true.size()) + " vs " +
                                 std::to_string(y_pred.size()) + ")");
  if (y_true.empty()) throw Error(Errc::input, "no labels to compare");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] == Label::fake, p = y_pred[i] == Label::fake;
    if (t && p) ++cm.tp;
    else if (!t && p) ++cm.fp;
    else if (!t) ++cm.tn;
    else ++cm.fn;
  }
  return cm;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size())
    throw Error(Errc::input, "label vectors differ in length (" + std::to_string(y_true.size()) + " vs " +
                                 std::to_string(y_pred.size()) + ")");
  auto t = labels_from_ints(y_true);
  auto p = labels_from_ints(y_pred);
  return confusion(t, p);
}

MetricsReport metrics(const ConfusionMatrix& cm, const std::string& model_name) {
  const std::size_t total = cm.total();
  if (total == 0) throw Error(Errc::input, "confusion matrix is empty");
  MetricsReport r;
  r.model_name = model_name;
  r.cm = cm;
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
  if (cm.tp + cm.fp == 0) r.precision_undefined = true;
  else r.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  if (cm.tp + cm.fn == 0) r.recall_undefined = true;
  else r.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  if (r.precision_undefined || r.recall_undefined || r.precision + r.recall == 0.0)
    r.f1_undefined = true;
  else
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

Leaderboard leaderboard(std::vector<MetricsReport> reports) {
  if (reports.empty()) throw Error(Errc::input, "leaderboard needs at least one report");
  std::sort(reports.begin(), reports.end(), [](const MetricsReport& a, const MetricsReport& b) {
    if (a.f1 != b.f1) return a.f1 > b.f1;
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.model_name < b.model_name;
  });
  double acc = 0, prec = 0, rec = 0, f1 = 0;
  for (const auto& r : reports) {
    acc = std::max(acc, r.accuracy);
    prec = std::max(prec, r.precision);
    rec = std::max(rec, r.recall);
    f1 = std::max(f1, r.f1);
  }
  Leaderboard board;
  for (auto& r : reports) {
    LeaderboardRow row;
    row.best_accuracy = r.accuracy == acc;
    row.best_precision = r.precision == prec;
    row.best_recall = r.recall == rec;
    row.best_f1 = r.f1 == f1;
    row.report = std::move(r);
    board.rows.push_back(std::move(row));
  }
  return board;
}

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "markdown" || name == "md") return ReportFormat::markdown;
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw Error(Errc::input, "unknown report format '" + name + "' (expected markdown, csv or json)");
}

std::vector<std::string> confusion_percent_cells(const ConfusionMatrix& cm, bool include_tn) {
  const std::size_t total = cm.total();
  if (total == 0) throw Error(Errc::input, "confusion matrix is empty");
  std::vector<std::string> cells;
  for (std::size_t v : {cm.tp, cm.fn, cm.fp}) cells.push_back(std::to_string(whole_percent(v, total)) + "%");
  if (include_tn) cells.push_back(std::to_string(whole_percent(cm.tn, total)) + "%");
  return cells;
}

json to_json(const MetricsReport& r) {
  json flags = json::array();
  if (r.precision_undefined) flags.push_back("precision_undefined");
  if (r.recall_undefined) flags.push_back("recall_undefined");
  if (r.f1_undefined) flags.push_back("f1_undefined");
  json j = {{"model", r.model_name},
            {"accuracy", r.accuracy},
            {"precision", r.precision},
            {"recall", r.recall},
            {"f1", r.f1},
            {"degenerate_flags", flags},
            {"confusion", {{"tp", r.cm.tp}, {"fn", r.cm.fn}, {"fp", r.cm.fp}, {"tn", r.cm.tn}}}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

MetricsReport metrics_from_json(const json& j) {
  MetricsReport r;
  try {
    r.model_name = j.at("model").get<std::string>();
    r.accuracy = j.at("accuracy").get<double>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.f1 = j.at("f1").get<double>();
    for (const auto& f : j.at("degenerate_flags")) {
      const auto s = f.get<std::string>();
      if (s == "precision_undefined") r.precision_undefined = true;
      else if (s == "recall_undefined") r.recall_undefined = true;
      else if (s == "f1_undefined") r.f1_undefined = true;
      else throw Error(Errc::input, "unknown degenerate flag '" + s + "'");
    }
    const auto& c = j.at("confusion");
    r.cm = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("tn").get<std::size_t>(),
            c.at("fn").get<std::size_t>()};
    r.note = j.value("note", std::string());
  } catch (const json::exception& e) {
    throw Error(Errc::input, std::string("malformed metrics report: ") + e.what());
  }
  return r;
}

json to_json(const Leaderboard& board) {
  json rows = json::array();
  for (const auto& row : board.rows) {
    json j = to_json(row.report);
    j["best"] = {{"accuracy", row.best_accuracy},
                 {"precision", row.best_precision},
                 {"recall", row.best_recall},
                 {"f1", row.best_f1}};
    rows.push_back(std::move(j));
  }
  return {{"schema", kReportSchema}, {"version", kReportVersion}, {"sorted_by", "f1"}, {"rows", rows}};
}

Leaderboard leaderboard_from_json(const json& j) {
  if (j.value("schema", std::string()) != kReportSchema) throw Error(Errc::input, "not a report document");
  if (j.value("version", 0) != kReportVersion) throw Error(Errc::input, "unsupported report version");
  Leaderboard board;
  for (const auto& row : j.at("rows")) {
    LeaderboardRow r;
    r.report = metrics_from_json(row);
    const auto& best = row.at("best");
    r.best_accuracy = best.at("accuracy").get<bool>();
    r.best_precision = best.at("precision").get<bool>();
    r.best_recall = best.at("recall").get<bool>();
    r.best_f1 = best.at("f1").get<bool>();
    board.rows.push_back(std::move(r));
  }
  return board;
}

std::string render_report(const Leaderboard& board, ReportFormat format, const RenderOptions& opts) {
  if (board.rows.empty()) throw Error(Errc::input, "cannot render an empty leaderboard");
  std::ostringstream out;
  switch (format) {
    case ReportFormat::json:
      out << to_json(board).dump(2) << '\n';
      break;
    case ReportFormat::csv: {
      out << "model,accuracy,precision,recall,f1,tp,fn,fp,tn,total,precision_undefined,recall_undefined,"
             "f1_undefined\r\n";
      for (const auto& row : board.rows) {
        const auto& r = row.report;
        out << csv_field(r.model_name) << ',' << full(r.accuracy) << ',' << full(r.precision) << ','
            << full(r.recall) << ',' << full(r.f1) << ',' << r.cm.tp << ',' << r.cm.fn << ',' << r.cm.fp << ','
            << r.cm.tn << ',' << r.cm.total() << ',' << r.precision_undefined << ',' << r.recall_undefined
            << ',' << r.f1_undefined << "\r\n";
      }
      break;
    }
    case ReportFormat::markdown: {
      if (!opts.title.empty()) out << "# " << opts.title << "\n\n";
      out << "## Model performance (sorted by F1 Score)\n\n";
      out << "| Model | Accuracy | Precision | Recall | F1 Score |\n";
      out << "|---|---|---|---|---|\n";
      std::vector<std::string> notes, undefined;
      for (const auto& row : board.rows) {
        const auto& r = row.report;
        std::string name = r.model_name;
        if (!r.note.empty()) {
          notes.push_back(r.model_name + ": " + r.note);
          name += " [" + std::to_string(notes.size()) + "]";
        }
        out << "| " << name << " | " << bold_if(row.best_accuracy, fixed2(r.accuracy)) << " | "
            << bold_if(row.best_precision, fixed2(r.precision)) << " | "
            << bold_if(row.best_recall, fixed2(r.recall)) << " | " << bold_if(row.best_f1, fixed2(r.f1))
            << " |\n";
        std::string u;
        if (r.precision_undefined) u += " precision";
        if (r.recall_undefined) u += " recall";
        if (r.f1_undefined) u += " f1";
        if (!u.empty()) undefined.push_back(r.model_name + ":" + u);
      }
      if (!notes.empty()) {
        out << '\n';
        for (std::size_t i = 0; i < notes.size(); ++i) out << "[" << i + 1 << "] " << notes[i] << "  \n";
      }
      if (!undefined.empty()) {
        out << "\nUndefined metrics, reported as 0:\n";
        for (const auto& u : undefined) out << "- " << u << '\n';
      }
      out << "\n## Confusion matrix results (% of test samples)\n\n";
      out << "| Model | TP% | FN% | FP% |" << (opts.include_tn ? " TN% | N |" : "") << '\n';
      out << "|---|---|---|---|" << (opts.include_tn ? "---|---|" : "") << '\n';
      for (const auto& row : board.rows) {
        out << "| " << row.report.model_name << " |";
        for (const auto& c : confusion_percent_cells(row.report.cm, opts.include_tn)) out << ' ' << c << " |";
        if (opts.include_tn) out << ' ' << row.report.cm.total() << " |";
        out << '\n';
      }
      break;
    }
  }
  return out.str();
}

}  // namespace newshub::eval
