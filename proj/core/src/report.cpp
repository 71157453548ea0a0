#include "taaco/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace taaco {

using nlohmann::json;

const char* error_category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::PerformedProhibited: return "performed_prohibited_task";
    case ErrorCategory::SkippedTask: return "skipped_task";
    case ErrorCategory::UnnecessaryDelayOrDisturbance: return "unnecessary_delay_or_disturbance";
    case ErrorCategory::UnnecessaryInteraction: return "unnecessary_interaction";
  }
  return "?";
}

const MetricRow* EvaluationReport::aggregate(const std::string& condition, int size) const {
  for (const MetricRow& row : rows) {
    if (row.fold == -1 && row.condition == condition && row.size == size) return &row;
  }
  return nullptr;
}

void EvaluationReport::check_invariants() const {
  for (const MetricRow& row : rows) {
    double total_error = 0.0;
    for (double r : row.error_rates) total_error += r;
    if (std::fabs(total_error - (1.0 - row.accuracy)) > 1e-9) {
      raise(ErrorCode::InvalidArgument,
            "report row (" + row.condition + ", size " + std::to_string(row.size) +
                ") violates the error-rate invariant");
    }
  }
}

namespace {

json row_to_json(const MetricRow& row) {
  json errors = json::object();
  json counts = json::object();
  for (int c = 0; c < kNumErrorCategories; ++c) {
    const char* name = error_category_name(static_cast<ErrorCategory>(c));
    errors[name] = row.error_rates[static_cast<size_t>(c)];
    counts[name] = row.error_counts[static_cast<size_t>(c)];
  }
  json out{{"condition", row.condition},
           {"size", row.size},
           {"fold", row.fold},
           {"points", row.points},
           {"correct", row.correct},
           {"accuracy", row.accuracy},
           {"explanation_eligible", row.explanation_eligible},
           {"explanation_hits", row.explanation_hits},
           {"error_rates", std::move(errors)},
           {"error_counts", std::move(counts)}};
  if (row.explanation_accuracy) out["explanation_accuracy"] = *row.explanation_accuracy;
  return out;
}

MetricRow row_from_json(const json& j) {
  MetricRow row;
  row.condition = j.at("condition").get<std::string>();
  row.size = j.at("size").get<int>();
  row.fold = j.at("fold").get<int>();
  row.points = j.at("points").get<int>();
  row.correct = j.at("correct").get<int>();
  row.accuracy = j.at("accuracy").get<double>();
  row.explanation_eligible = j.at("explanation_eligible").get<int>();
  row.explanation_hits = j.at("explanation_hits").get<int>();
  if (j.contains("explanation_accuracy")) {
    row.explanation_accuracy = j.at("explanation_accuracy").get<double>();
  }
  for (int c = 0; c < kNumErrorCategories; ++c) {
    const char* name = error_category_name(static_cast<ErrorCategory>(c));
    row.error_rates[static_cast<size_t>(c)] = j.at("error_rates").at(name).get<double>();
    row.error_counts[static_cast<size_t>(c)] = j.at("error_counts").at(name).get<int>();
  }
  return row;
}

}  // namespace

std::string report_to_json(const EvaluationReport& report) {
  json rows = json::array();
  for (const MetricRow& row : report.rows) rows.push_back(row_to_json(row));
  json out{{"schema_version", report.schema_version},
           {"persona_id", report.persona_id},
           {"seed", report.seed},
           {"k", report.k},
           {"sizes", report.sizes},
           {"rows", std::move(rows)}};
  return out.dump(2);
}

EvaluationReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
  EvaluationReport report;
  try {
    report.schema_version = j.at("schema_version").get<int>();
    if (report.schema_version != 1) {
      raise(ErrorCode::SchemaError,
            "unsupported report schema version " + std::to_string(report.schema_version));
    }
    report.persona_id = j.at("persona_id").get<std::string>();
    report.seed = j.at("seed").get<uint64_t>();
    report.k = j.at("k").get<int>();
    report.sizes = j.at("sizes").get<std::vector<int>>();
    for (const json& row : j.at("rows")) report.rows.push_back(row_from_json(row));
  } catch (const json::exception& e) {
    raise(ErrorCode::SchemaError, std::string("report: ") + e.what());
  }
  return report;
}

void write_report(const EvaluationReport& report, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out.is_open()) raise(ErrorCode::IoError, "cannot write report " + tmp);
    out << report_to_json(report) << '\n';
    if (!out.good()) raise(ErrorCode::IoError, "short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    raise(ErrorCode::IoError, "cannot move report into place at " + path);
  }
}

EvaluationReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) raise(ErrorCode::IoError, "cannot open report " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return report_from_json(buffer.str());
}

std::string report_to_table(const EvaluationReport& report) {
  std::string out =
      "persona\tcondition\tsize\tfold\tpoints\tcorrect\taccuracy\texplanation_accuracy\t"
      "explanation_eligible";
  for (int c = 0; c < kNumErrorCategories; ++c) {
    out += '\t';
    out += error_category_name(static_cast<ErrorCategory>(c));
  }
  out += '\n';
  char buf[64];
  for (const MetricRow& row : report.rows) {
    out += report.persona_id + '\t' + row.condition + '\t' + std::to_string(row.size) + '\t' +
           std::to_string(row.fold) + '\t' + std::to_string(row.points) + '\t' +
           std::to_string(row.correct);
    std::snprintf(buf, sizeof(buf), "\t%.6f", row.accuracy);
    out += buf;
    if (row.explanation_accuracy) {
      std::snprintf(buf, sizeof(buf), "\t%.6f", *row.explanation_accuracy);
      out += buf;
    } else {
      out += "\t-";
    }
    out += '\t' + std::to_string(row.explanation_eligible);
    for (int c = 0; c < kNumErrorCategories; ++c) {
      std::snprintf(buf, sizeof(buf), "\t%.6f", row.error_rates[static_cast<size_t>(c)]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

EvaluationReport merge_reports(const std::vector<EvaluationReport>& reports) {
  if (reports.empty()) raise(ErrorCode::InvalidArgument, "nothing to merge");
  EvaluationReport out = reports.front();
  for (size_t i = 1; i < reports.size(); ++i) {
    const EvaluationReport& r = reports[i];
    if (r.persona_id != out.persona_id || r.k != out.k || r.seed != out.seed) {
      raise(ErrorCode::InvalidArgument, "reports disagree on persona/k/seed");
    }
    for (int size : r.sizes) {
      if (std::find(out.sizes.begin(), out.sizes.end(), size) == out.sizes.end()) {
        out.sizes.push_back(size);
      }
    }
    out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
  }
  return out;
}

}  // namespace taaco
