#include "vmmr/report.hpp"

#include <algorithm>

#include "vmmr/util.hpp"

namespace vmmr {

namespace {

constexpr int kDecimals = 4;

std::string fixed(double v) { return format_fixed(v, kDecimals); }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string xml_escape(std::string_view s) {
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

// Renders rows as a bordered text table; first row is the header.
std::string grid(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::string rule = "+";
  for (auto w : widths) rule += std::string(w + 2, '-') + "+";
  rule += '\n';

  std::string out = rule;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += '|';
    for (std::size_t i = 0; i < widths.size(); ++i) {
      const std::string cell = i < rows[r].size() ? rows[r][i] : "";
      out += ' ' + cell + std::string(widths[i] - cell.size(), ' ') + " |";
    }
    out += '\n';
    if (r == 0) out += rule;
  }
  out += rule;
  return out;
}

std::string label_header(const VehicleLabel& l) { return l.canonical_id(); }

}  // namespace

std::string overall_table(std::span<const EvalReport* const> reports) {
  std::vector<std::vector<std::string>> rows = {{"Model", "Accuracy", "Recall", "Precision"}};
  for (const auto* r : reports) {
    rows.push_back({r->method, fixed(r->accuracy), fixed(r->macro_recall), fixed(r->macro_precision)});
  }
  return grid(rows);
}

std::string text_report(const EvalReport& report, const EmitOptions& options) {
  std::string out = "Evaluation report: " + report.method + "\n";
  if (options.timestamps) out += "Generated: " + format_rfc3339(now_utc()) + "\n";
  out += "Queries: " + std::to_string(report.n_queries) +
         "   Abstentions: " + std::to_string(report.abstentions);
  if (report.k > 0) out += "   k: " + std::to_string(report.k);
  out += "\n\nOverall performance\n";
  const EvalReport* one[] = {&report};
  out += overall_table(one);
  out += "Accuracy is micro accuracy; Recall and Precision are macro averages over classes.\n"
         "Abstentions count as incorrect; precision is 0 for a class that is never predicted.\n";

  out += "\nPer-class performance\n";
  std::vector<std::vector<std::string>> rows = {
      {"Car Model", "Accuracy", "Recall", "Precision", "Support"}};
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& m = report.per_class[c];
    rows.push_back({report.confusion.labels()[c].display(), fixed(m.accuracy), fixed(m.recall),
                    fixed(m.precision), std::to_string(m.support)});
  }
  out += grid(rows);

  out += "\nConfusion matrix (rows: true, columns: predicted)\n";
  const auto& cm = report.confusion;
  std::vector<std::vector<std::string>> cm_rows;
  std::vector<std::string> header = {"true \\ predicted"};
  for (const auto& l : cm.labels()) header.push_back(l.canonical_id());
  header.push_back("abstain");
  cm_rows.push_back(std::move(header));
  for (std::size_t r = 0; r < cm.classes(); ++r) {
    std::vector<std::string> row = {cm.labels()[r].canonical_id()};
    for (std::size_t c = 0; c < cm.columns(); ++c) row.push_back(std::to_string(cm.at(r, c)));
    cm_rows.push_back(std::move(row));
  }
  out += grid(cm_rows);

  if (!report.ranks.by_rank.empty()) {
    out += "\nRetrieval rank of the true label\n";
    std::vector<std::vector<std::string>> rank_rows = {{"Rank", "Count"}};
    for (std::size_t r = 0; r < report.ranks.by_rank.size(); ++r) {
      rank_rows.push_back({std::to_string(r + 1), std::to_string(report.ranks.by_rank[r])});
    }
    rank_rows.push_back({"miss", std::to_string(report.ranks.miss)});
    out += grid(rank_rows);
  }
  return out;
}

std::string confusion_csv(const EvalReport& report) {
  const auto& cm = report.confusion;
  std::string out = "true\\predicted";
  for (const auto& l : cm.labels()) out += ',' + csv_field(label_header(l));
  out += ",abstain\n";
  for (std::size_t r = 0; r < cm.classes(); ++r) {
    out += csv_field(label_header(cm.labels()[r]));
    for (std::size_t c = 0; c < cm.columns(); ++c) out += ',' + std::to_string(cm.at(r, c));
    out += '\n';
  }
  return out;
}

std::string per_class_csv(const EvalReport& report) {
  std::string out = "label,accuracy,recall,precision,support,predicted\n";
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& m = report.per_class[c];
    out += csv_field(report.confusion.labels()[c].canonical_id()) + ',' + fixed(m.accuracy) + ',' +
           fixed(m.recall) + ',' + fixed(m.precision) + ',' + std::to_string(m.support) + ',' +
           std::to_string(m.predicted) + '\n';
  }
  return out;
}

std::string rank_distribution_csv(const EvalReport& report) {
  std::string out = "rank,count\n";
  for (std::size_t r = 0; r < report.ranks.by_rank.size(); ++r) {
    out += std::to_string(r + 1) + ',' + std::to_string(report.ranks.by_rank[r]) + '\n';
  }
  out += "miss," + std::to_string(report.ranks.miss) + '\n';
  return out;
}

std::string overall_csv(const EvalReport& report) {
  return "model,accuracy,recall,precision,n_queries,abstentions\n" + csv_field(report.method) +
         ',' + fixed(report.accuracy) + ',' + fixed(report.macro_recall) + ',' +
         fixed(report.macro_precision) + ',' + std::to_string(report.n_queries) + ',' +
         std::to_string(report.abstentions) + '\n';
}

std::string confusion_svg(const EvalReport& report) {
  const auto& cm = report.confusion;
  constexpr int kCell = 44, kLeft = 190, kTop = 190, kPad = 20;
  const int width = kLeft + static_cast<int>(cm.columns()) * kCell + kPad;
  const int height = kTop + static_cast<int>(cm.classes()) * kCell + kPad + 24;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out += "<text x=\"" + std::to_string(kPad) + "\" y=\"18\" font-size=\"14\">Confusion matrix: " +
         xml_escape(report.method) + "</text>\n";

  auto col_name = [&](std::size_t c) {
    return c == cm.abstain_column() ? std::string("abstain") : cm.labels()[c].display();
  };
  for (std::size_t c = 0; c < cm.columns(); ++c) {
    const int x = kLeft + static_cast<int>(c) * kCell + kCell / 2;
    out += "<text transform=\"translate(" + std::to_string(x) + "," + std::to_string(kTop - 6) +
           ") rotate(-60)\">" + xml_escape(col_name(c)) + "</text>\n";
  }
  for (std::size_t r = 0; r < cm.classes(); ++r) {
    const int y = kTop + static_cast<int>(r) * kCell;
    out += "<text x=\"" + std::to_string(kLeft - 6) + "\" y=\"" + std::to_string(y + kCell / 2 + 4) +
           "\" text-anchor=\"end\">" + xml_escape(cm.labels()[r].display()) + "</text>\n";
    const std::size_t row_total = cm.row_sum(r);
    for (std::size_t c = 0; c < cm.columns(); ++c) {
      const std::size_t n = cm.at(r, c);
      const double share = row_total == 0 ? 0.0 : static_cast<double>(n) / row_total;
      const bool abstain = c == cm.abstain_column();
      // white -> blue (labels) or white -> orange (abstain)
      const int red = abstain ? 255 : static_cast<int>(255 - share * 222);
      const int green = static_cast<int>(255 - share * (abstain ? 115 : 160));
      const int blue = abstain ? static_cast<int>(255 - share * 255) : static_cast<int>(255 - share * 75);
      const int x = kLeft + static_cast<int>(c) * kCell;
      char fill[8];
      std::snprintf(fill, sizeof(fill), "#%02x%02x%02x", red, green, blue);
      out += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
             std::to_string(kCell) + "\" height=\"" + std::to_string(kCell) + "\" fill=\"" + fill +
             "\" stroke=\"#999999\"/>\n";
      out += "<text x=\"" + std::to_string(x + kCell / 2) + "\" y=\"" +
             std::to_string(y + kCell / 2 + 4) + "\" text-anchor=\"middle\" fill=\"" +
             (share > 0.6 ? "#ffffff" : "#000000") + "\">" + std::to_string(n) + "</text>\n";
    }
  }
  out += "<text x=\"" + std::to_string(kPad) + "\" y=\"" + std::to_string(height - 8) +
         "\">rows: true label, columns: predicted label</text>\n";
  out += "</svg>\n";
  return out;
}

std::string sweep_table(std::span<const SweepRow> rows, std::optional<double> baseline_accuracy) {
  std::vector<std::vector<std::string>> cells = {{"K-value", "Accuracy"}};
  if (baseline_accuracy) cells.push_back({std::string(kBaselineMethodName), fixed(*baseline_accuracy)});
  for (const auto& row : rows) {
    cells.push_back({"Top-" + std::to_string(row.k), fixed(row.report.accuracy)});
  }
  return grid(cells);
}

std::string sweep_csv(std::span<const SweepRow> rows, std::optional<double> baseline_accuracy) {
  std::string out = "k_value,accuracy,macro_recall,macro_precision,effective_k\n";
  if (baseline_accuracy) out += csv_field(kBaselineMethodName) + ',' + fixed(*baseline_accuracy) + ",,,\n";
  for (const auto& row : rows) {
    out += "Top-" + std::to_string(row.k) + ',' + fixed(row.report.accuracy) + ',' +
           fixed(row.report.macro_recall) + ',' + fixed(row.report.macro_precision) + ',' +
           std::to_string(row.effective_k) + '\n';
  }
  return out;
}

std::vector<std::filesystem::path> emit_report(const EvalReport& report, ReportFormat format,
                                               const std::filesystem::path& dir,
                                               const EmitOptions& options) {
  std::vector<std::filesystem::path> written;
  auto put = [&](const char* name, const std::string& content) {
    write_file_atomic(dir / name, content);
    written.push_back(dir / name);
  };
  switch (format) {
    case ReportFormat::kTableText:
      put("report.txt", text_report(report, options));
      break;
    case ReportFormat::kCsv:
      put("confusion.csv", confusion_csv(report));
      put("per_class.csv", per_class_csv(report));
      put("rank_distribution.csv", rank_distribution_csv(report));
      put("overall.csv", overall_csv(report));
      break;
    case ReportFormat::kSvgHeatmap:
      put("confusion.svg", confusion_svg(report));
      break;
  }
  return written;
}

}  // namespace vmmr
