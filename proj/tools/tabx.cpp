#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tabx/baselines.hpp"
#include "tabx/errors.hpp"
#include "tabx/llm.hpp"
#include "tabx/perturb.hpp"
#include "tabx/report.hpp"
#include "tabx/rubric.hpp"
#include "tabx/stats.hpp"
#include "tabx/table.hpp"
#include "tabx/util.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace tabx;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitProvider = 3;

model::Table load_table(const std::string& path) {
    auto format = model::format_from_extension(path);
    if (!format) throw MalformedInput("unrecognized table extension: " + path);
    model::Table t = model::parse_table(util::read_file(path), *format);
    if (!t.source_id) t.source_id = fs::path(path).stem().string();
    return t;
}

rubric::WeightConfig parse_weights_file(const std::string& path) {
    std::string text = util::read_file(path);
    rubric::WeightConfig w;
    w.name = fs::path(path).stem().string();
    std::map<std::string, double*> slots{
        {"beta_missing", &w.beta_missing}, {"beta_extra", &w.beta_extra}, {"beta_partial", &w.beta_partial},
        {"alpha_row", &w.alpha_row},       {"alpha_col", &w.alpha_col},   {"alpha_cell", &w.alpha_cell},
        {"omega_p", &w.omega_p}};

    std::string trimmed = util::trim(text);
    if (!trimmed.empty() && trimmed.front() == '{') {
        auto j = nlohmann::json::parse(trimmed, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw MalformedInput("weights file is not a JSON object: " + path);
        if (j.contains("name") && j["name"].is_string()) w.name = j["name"].get<std::string>();
        for (auto& [key, slot] : slots)
            if (j.contains(key) && j[key].is_number()) *slot = j[key].get<double>();
        return w;
    }
    // key = value lines, '#' comments
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = util::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw MalformedInput("weights line without '=': " + line);
        std::string key = util::trim(line.substr(0, eq));
        std::string value = util::trim(line.substr(eq + 1));
        if (key == "name") {
            w.name = value;
            continue;
        }
        auto slot = slots.find(key);
        if (slot == slots.end()) throw MalformedInput("unknown weight key: " + key);
        auto parsed = util::parse_double(value);
        if (!parsed) throw MalformedInput("unparseable weight value for " + key + ": " + value);
        *slot->second = *parsed;
    }
    return w;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += "\"";
    return out;
}

std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::vector<std::string> sorted_table_files(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (model::format_from_extension(entry.path().string())) files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max(1u, jobs);
    if (jobs == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    std::size_t workers = std::min<std::size_t>(jobs, n);
    for (std::size_t t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct LlmFlags {
    std::string mode = "off";     // off | on | strict
    std::string replay = "";      // override of TABX_LLM_REPLAY when nonempty
};

std::unique_ptr<llm::LlmClient> make_client(const LlmFlags& flags) {
    if (flags.mode == "off") return nullptr;
    llm::ProviderConfig cfg = llm::ProviderConfig::from_env();
    if (!flags.replay.empty()) cfg.replay = llm::replay_mode_from_name(flags.replay);
    return std::make_unique<llm::LlmClient>(cfg);
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
    std::string gt_path, cand_path, weights_path, output, format = "json";
    bool pretty = false;
    LlmFlags llm;
};

int cmd_eval(const EvalArgs& args) {
    report::EvaluationOptions opts;
    if (!args.weights_path.empty()) opts.weights = parse_weights_file(args.weights_path);
    opts.use_llm = args.llm.mode != "off";
    opts.llm_strict = args.llm.mode == "strict";

    model::Table gt = load_table(args.gt_path);
    model::Table cand = load_table(args.cand_path);

    auto client = make_client(args.llm);
    report::EvaluationOutcome outcome = report::evaluate_tables(gt, cand, opts, client.get());

    std::string text;
    if (args.pretty || args.format == "markdown") {
        text = report::render_pretty(outcome);
    } else if (args.format == "csv") {
        text =
            "gt,cand,error,quality,em_cells,em_table,chrf,rouge_l,transposed\n" + csv_escape(outcome.gt.id) + "," +
            csv_escape(outcome.cand.id) + "," + csv_num(outcome.rubric.error) + "," + csv_num(outcome.rubric.quality) +
            "," + csv_num(outcome.baselines.em_cells) + "," + (outcome.baselines.em_table ? "1" : "0") + "," +
            csv_num(outcome.baselines.chrf) + "," + csv_num(outcome.baselines.rouge_l) + "," +
            (outcome.transposed ? "1" : "0") + "\n";
    } else {
        text = report::report_json(outcome, opts);
    }

    if (args.output.empty())
        std::cout << text;
    else
        util::write_file_atomic(args.output, text);
    return 0;
}

// ---- perturb ---------------------------------------------------------------

struct PerturbArgs {
    std::string input_dir, out_dir;
    std::uint64_t seed = 42;
    std::size_t per_table = 5;
    std::size_t synthetic = 10;
    std::string mix = "";
};

perturb::DifficultyMix parse_mix(const std::string& text) {
    if (text.empty()) return perturb::default_mix();
    std::vector<double> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        std::string piece = util::trim(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        auto v = util::parse_double(piece);
        if (!v || *v < 0) throw MalformedInput("bad mix component: " + piece);
        parts.push_back(*v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (parts.size() != 3) throw MalformedInput("mix needs exactly three comma-separated shares (easy,medium,hard)");
    return {{perturb::Difficulty::Easy, parts[0]},
            {perturb::Difficulty::Medium, parts[1]},
            {perturb::Difficulty::Hard, parts[2]}};
}

int cmd_perturb(const PerturbArgs& args) {
    std::vector<model::Table> cleans;
    if (!args.input_dir.empty()) {
        if (!fs::is_directory(args.input_dir)) throw MalformedInput("not a directory: " + args.input_dir);
        for (const auto& file : sorted_table_files(args.input_dir)) cleans.push_back(load_table(file));
        if (cleans.empty()) throw MalformedInput("no parseable tables in " + args.input_dir);
    } else {
        cleans = perturb::synthetic_tables(args.synthetic, args.seed);
    }

    perturb::DifficultyMix mix = parse_mix(args.mix);
    auto cases = perturb::generate_benchmark(cleans, args.per_table, mix, args.seed);
    perturb::write_benchmark(cases, args.out_dir, args.seed, mix);
    std::cout << "wrote " << cases.size() << " cases from " << cleans.size() << " tables to " << args.out_dir
              << "\n";
    return 0;
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
    std::string bench_dir, out_dir, weights_path, rankings_path;
    unsigned jobs = 1;
    bool from_reports = false;
    LlmFlags llm;
};

struct CaseRow {
    std::string id;
    std::string kinds;       // '+'-joined kind names
    std::string difficulty;  // hardest band among applied
    bool formatting_only = false;
    bool guaranteed = false;
    double expected_error = 0.0;
    rubric::RubricCounts expected_counts;
    bool expected_transposed = false;
    double error = 0.0;
    double quality = 1.0;
    rubric::RubricCounts counts;
    bool transposed = false;
    report::BaselineScores baselines;
};

bool counts_equal(const rubric::RubricCounts& a, const rubric::RubricCounts& b) {
    return a.f == b.f && a.N == b.N;
}

double expected_error_of(const perturb::ExpectedOutcome& expected, const rubric::WeightConfig& w) {
    std::vector<rubric::PartialCell> partials;
    for (std::size_t i = 0; i < expected.partial_magnitudes.size(); ++i)
        partials.push_back({0, i, compare::ValueKind::Text, expected.partial_magnitudes[i]});
    return rubric::compute_score(expected.counts, partials, w);
}

ordered_json counts_to_doc(const rubric::RubricCounts& c) {
    using rubric::EntityType;
    using rubric::InfoType;
    auto row = [&](InfoType i) {
        return ordered_json{{"row", c.at(i, EntityType::Row)},
                            {"column", c.at(i, EntityType::Column)},
                            {"cell", c.at(i, EntityType::Cell)}};
    };
    return ordered_json{{"missing", row(InfoType::Missing)},
                        {"extra", row(InfoType::Extra)},
                        {"partial", row(InfoType::Partial)},
                        {"N",
                         ordered_json{{"row", c.total(EntityType::Row)},
                                      {"column", c.total(EntityType::Column)},
                                      {"cell", c.total(EntityType::Cell)}}}};
}

void counts_from_doc(const ordered_json& j, rubric::RubricCounts& c) {
    using rubric::EntityType;
    using rubric::InfoType;
    auto read = [&](const char* key, InfoType i) {
        if (!j.contains(key) || !j.at(key).is_object()) return;
        c.at(i, EntityType::Row) = j.at(key).value("row", std::size_t{0});
        c.at(i, EntityType::Column) = j.at(key).value("column", std::size_t{0});
        c.at(i, EntityType::Cell) = j.at(key).value("cell", std::size_t{0});
    };
    read("missing", InfoType::Missing);
    read("extra", InfoType::Extra);
    read("partial", InfoType::Partial);
    if (j.contains("N") && j.at("N").is_object()) {
        c.total(EntityType::Row) = j.at("N").value("row", std::size_t{0});
        c.total(EntityType::Column) = j.at("N").value("column", std::size_t{0});
        c.total(EntityType::Cell) = j.at("N").value("cell", std::size_t{0});
    }
}

std::string hardest_band(const std::vector<perturb::PerturbationSpec>& applied) {
    perturb::Difficulty hardest = perturb::Difficulty::Easy;
    for (const auto& spec : applied)
        if (static_cast<int>(spec.difficulty) > static_cast<int>(hardest)) hardest = spec.difficulty;
    return perturb::difficulty_name(hardest);
}

std::string joined_kinds(const std::vector<perturb::PerturbationSpec>& applied) {
    std::string out;
    for (const auto& spec : applied) {
        if (!out.empty()) out += "+";
        out += perturb::kind_name(spec.kind);
    }
    return out;
}

void write_cases_csv(const std::string& path, const std::vector<CaseRow>& rows) {
    std::string csv =
        "case_id,kinds,difficulty,formatting_only,guaranteed,expected_error,error,quality,counts_match,"
        "expected_transposed,transposed_detected,em_cells,em_table,chrf,rouge_l\n";
    for (const auto& r : rows) {
        csv += csv_escape(r.id) + "," + csv_escape(r.kinds) + "," + r.difficulty + "," +
               (r.formatting_only ? "1" : "0") + "," + (r.guaranteed ? "1" : "0") + "," +
               csv_num(r.expected_error) + "," + csv_num(r.error) + "," + csv_num(r.quality) + "," +
               (counts_equal(r.counts, r.expected_counts) ? "1" : "0") + "," + (r.expected_transposed ? "1" : "0") +
               "," + (r.transposed ? "1" : "0") + "," + csv_num(r.baselines.em_cells) + "," +
               (r.baselines.em_table ? "1" : "0") + "," + csv_num(r.baselines.chrf) + "," +
               csv_num(r.baselines.rouge_l) + "\n";
    }
    util::write_file_atomic(path, csv);
}

void write_detection_csv(const std::string& path, const std::vector<CaseRow>& rows) {
    struct Metric {
        const char* name;
        std::function<bool(const CaseRow&)> flagged;
    };
    const double kTol = 1e-9;
    std::vector<Metric> metrics{
        {"rubric", [&](const CaseRow& r) { return r.error > 1e-12; }},
        {"em_cells", [&](const CaseRow& r) { return r.baselines.em_cells < 1.0; }},
        {"em_table", [&](const CaseRow& r) { return !r.baselines.em_table; }},
        {"chrf", [&](const CaseRow& r) { return r.baselines.chrf < 1.0 - kTol; }},
        {"rouge_l", [&](const CaseRow& r) { return r.baselines.rouge_l < 1.0 - kTol; }},
    };
    std::string csv = "metric,tp,fp,tn,fn,accuracy,sensitivity,specificity,precision,f1,harmonic3\n";
    for (const auto& m : metrics) {
        stats::DetectionCounts c;
        for (const auto& r : rows) {
            bool positive = !r.formatting_only;  // semantically perturbed
            bool flagged = m.flagged(r);
            if (positive && flagged) ++c.true_positive;
            if (positive && !flagged) ++c.false_negative;
            if (!positive && flagged) ++c.false_positive;
            if (!positive && !flagged) ++c.true_negative;
        }
        csv += std::string(m.name) + "," + std::to_string(c.true_positive) + "," + std::to_string(c.false_positive) +
               "," + std::to_string(c.true_negative) + "," + std::to_string(c.false_negative) + ",";
        if (c.true_positive + c.false_positive + c.true_negative + c.false_negative == 0) {
            csv += ",,,,,\n";
            continue;
        }
        auto dm = stats::detection_metrics(c);
        auto opt = [&](const std::optional<double>& v) { return v ? csv_num(*v) : std::string(); };
        csv += csv_num(dm.accuracy) + "," + opt(dm.sensitivity) + "," + opt(dm.specificity) + "," +
               opt(dm.precision) + "," + opt(dm.f1) + "," + opt(dm.harmonic3) + "\n";
    }
    util::write_file_atomic(path, csv);
}

// One correlation battery between a reference score set and a metric score
// set over the same ids. higher_first/higher_second give each side's ranking
// orientation.
void battery_rows(std::string& csv, const std::string& reference, const std::string& metric,
                  const std::vector<std::pair<std::string, double>>& ref_scores,
                  const std::vector<std::pair<std::string, double>>& metric_scores, bool ref_higher_better,
                  bool metric_higher_better) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < ref_scores.size(); ++i) {
        x.push_back(ref_scores[i].second);
        y.push_back(metric_scores[i].second);
    }
    std::size_t n = x.size();
    auto emit = [&](const char* stat, const char* params, double value, bool ok) {
        csv += reference + "," + metric + "," + stat + "," + (ok ? csv_num(value) : std::string()) + "," +
               std::to_string(n) + "," + params + "\n";
    };
    auto guarded = [&](const char* stat, const char* params, auto fn) {
        try {
            emit(stat, params, fn(), true);
        } catch (const Error&) {
            emit(stat, params, 0.0, false);
        }
    };
    // sign convention: orient both sides as "higher is better" before the
    // score-space statistics so correlations read positively
    std::vector<double> xs = x, ys = y;
    if (!ref_higher_better)
        for (auto& v : xs) v = -v;
    if (!metric_higher_better)
        for (auto& v : ys) v = -v;
    guarded("pearson", "", [&] { return stats::pearson(xs, ys); });
    guarded("spearman_rho", "", [&] { return stats::spearman_rho(xs, ys); });
    guarded("kendall_tau", "", [&] { return stats::kendall_tau(xs, ys); });

    auto ranking_a = stats::scores_to_ranking(ref_scores, ref_higher_better);
    auto ranking_b = stats::scores_to_ranking(metric_scores, metric_higher_better);
    guarded("weighted_kendall", "hyperbolic", [&] { return stats::weighted_kendall(ranking_a, ranking_b); });
    guarded("rbo", "p=0.9", [&] { return stats::rbo(ranking_a, ranking_b, 0.9); });
    guarded("footrule", "normalized", [&] { return stats::spearman_footrule(ranking_a, ranking_b); });
}

void write_correlations_csv(const std::string& path, const std::vector<CaseRow>& rows,
                            const std::string& rankings_path) {
    std::string csv = "reference,metric,statistic,value,n,parameters\n";

    auto scores_of = [&](auto getter) {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& r : rows) out.push_back({r.id, getter(r)});
        return out;
    };
    auto expected = scores_of([](const CaseRow& r) { return r.expected_error; });
    auto error = scores_of([](const CaseRow& r) { return r.error; });
    auto quality = scores_of([](const CaseRow& r) { return r.quality; });
    auto em = scores_of([](const CaseRow& r) { return r.baselines.em_cells; });
    auto chrf = scores_of([](const CaseRow& r) { return r.baselines.chrf; });
    auto rouge = scores_of([](const CaseRow& r) { return r.baselines.rouge_l; });

    if (rows.size() >= 2) {
        battery_rows(csv, "expected_error", "rubric_error", expected, error, false, false);
        battery_rows(csv, "expected_error", "em_cells", expected, em, false, true);
        battery_rows(csv, "expected_error", "chrf", expected, chrf, false, true);
        battery_rows(csv, "expected_error", "rouge_l", expected, rouge, false, true);
    }

    if (!rankings_path.empty()) {
        auto doc = nlohmann::json::parse(util::read_file(rankings_path), nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) throw MalformedInput("rankings file is not a JSON object");
        std::map<std::string, std::map<std::string, double>> evaluators;
        bool nested = !doc.empty() && doc.begin()->is_object();
        if (nested) {
            for (auto& [name, scores] : doc.items()) {
                if (!scores.is_object()) throw MalformedInput("mixed rankings file shapes");
                for (auto& [id, v] : scores.items()) {
                    if (!v.is_number()) throw MalformedInput("non-numeric human score for " + id);
                    evaluators[name][id] = v.get<double>();
                }
            }
        } else {
            for (auto& [id, v] : doc.items()) {
                if (!v.is_number()) throw MalformedInput("non-numeric human score for " + id);
                evaluators["human"][id] = v.get<double>();
            }
        }
        std::map<std::string, const CaseRow*> by_id;
        for (const auto& r : rows) by_id[r.id] = &r;
        for (const auto& [name, scores] : evaluators) {
            std::vector<std::pair<std::string, double>> human;
            std::vector<const CaseRow*> covered;
            for (const auto& [id, score] : scores) {
                auto it = by_id.find(id);
                if (it == by_id.end()) throw MalformedInput("ranked id not in benchmark: " + id);
                human.push_back({id, score});
                covered.push_back(it->second);
            }
            if (human.size() < 2) throw MalformedInput("evaluator " + name + " ranks fewer than two cases");
            auto pick = [&](auto getter) {
                std::vector<std::pair<std::string, double>> out;
                for (const auto* r : covered) out.push_back({r->id, getter(*r)});
                return out;
            };
            battery_rows(csv, name, "rubric_quality", human, pick([](const CaseRow& r) { return r.quality; }),
                         true, true);
            battery_rows(csv, name, "em_cells", human, pick([](const CaseRow& r) { return r.baselines.em_cells; }),
                         true, true);
            battery_rows(csv, name, "chrf", human, pick([](const CaseRow& r) { return r.baselines.chrf; }), true,
                         true);
            battery_rows(csv, name, "rouge_l", human, pick([](const CaseRow& r) { return r.baselines.rouge_l; }),
                         true, true);
        }
    }
    util::write_file_atomic(path, csv);
}

int cmd_bench(const BenchArgs& args) {
    report::EvaluationOptions opts;
    if (!args.weights_path.empty()) opts.weights = parse_weights_file(args.weights_path);
    opts.use_llm = args.llm.mode != "off";
    opts.llm_strict = args.llm.mode == "strict";

    fs::create_directories(args.out_dir);
    std::vector<CaseRow> rows;

    if (args.from_reports) {
        std::vector<std::string> files;
        fs::path reports_dir = fs::path(args.out_dir) / "reports";
        if (!fs::is_directory(reports_dir)) throw MalformedInput("no reports directory under " + args.out_dir);
        for (const auto& entry : fs::directory_iterator(reports_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw MalformedInput("no stored reports under " + args.out_dir);
        for (const auto& file : files) {
            report::StoredReport stored = report::parse_report(util::read_file(file));
            if (!stored.provenance.is_object())
                throw MalformedInput("stored report lacks benchmark provenance: " + file);
            CaseRow r;
            r.id = stored.provenance.value("case_id", stored.cand_id);
            r.kinds = stored.provenance.value("kinds", "");
            r.difficulty = stored.provenance.value("difficulty", "");
            r.formatting_only = stored.provenance.value("formatting_only", false);
            r.guaranteed = stored.provenance.value("guaranteed", false);
            r.expected_error = stored.provenance.value("expected_error", 0.0);
            if (stored.provenance.contains("expected_counts"))
                counts_from_doc(stored.provenance["expected_counts"], r.expected_counts);
            r.expected_transposed = stored.provenance.value("expected_transposed", false);
            r.error = stored.error;
            r.quality = stored.quality;
            r.counts = stored.counts;
            r.transposed = stored.transposed;
            r.baselines = stored.baselines;
            rows.push_back(std::move(r));
        }
    } else {
        auto cases = perturb::load_benchmark(args.bench_dir);
        if (cases.empty()) throw MalformedInput("benchmark has no cases: " + args.bench_dir);
        fs::create_directories(fs::path(args.out_dir) / "reports");

        auto client = make_client(args.llm);
        rows.resize(cases.size());
        parallel_for(cases.size(), args.jobs, [&](std::size_t i) {
            const auto& c = cases[i];
            auto outcome = report::evaluate_tables(c.clean, c.perturbed, opts, client.get());
            perturb::ExpectedOutcome expected = perturb::expected_rubric(c);

            CaseRow r;
            r.id = c.id;
            r.kinds = joined_kinds(c.applied);
            r.difficulty = hardest_band(c.applied);
            r.formatting_only = expected.formatting_only();
            r.guaranteed = expected.guaranteed;
            r.expected_error = expected_error_of(expected, opts.weights);
            r.expected_counts = expected.counts;
            r.expected_transposed = expected.transposed;
            r.error = outcome.rubric.error;
            r.quality = outcome.rubric.quality;
            r.counts = outcome.rubric.counts;
            r.transposed = outcome.transposed;
            r.baselines = outcome.baselines;

            ordered_json doc = report::report_document(outcome, opts);
            doc["provenance"] = ordered_json{{"case_id", r.id},
                                             {"kinds", r.kinds},
                                             {"difficulty", r.difficulty},
                                             {"formatting_only", r.formatting_only},
                                             {"guaranteed", r.guaranteed},
                                             {"expected_error", r.expected_error},
                                             {"expected_counts", counts_to_doc(r.expected_counts)},
                                             {"expected_transposed", r.expected_transposed}};
            util::write_file_atomic((fs::path(args.out_dir) / "reports" / (c.id + ".json")).string(),
                                    doc.dump(2) + "\n");
            rows[i] = std::move(r);
        });
    }

    write_cases_csv((fs::path(args.out_dir) / "cases.csv").string(), rows);
    write_detection_csv((fs::path(args.out_dir) / "detection.csv").string(), rows);
    write_correlations_csv((fs::path(args.out_dir) / "correlations.csv").string(), rows, args.rankings_path);
    std::cout << "evaluated " << rows.size() << " cases to " << args.out_dir << "\n";
    return 0;
}

// ---- sweep -----------------------------------------------------------------

struct SweepArgs {
    std::string bench_dir, out_dir;
    std::vector<double> lows;
    unsigned jobs = 1;
};

int cmd_sweep(const SweepArgs& args) {
    auto cases = perturb::load_benchmark(args.bench_dir);
    if (cases.empty()) throw MalformedInput("benchmark has no cases: " + args.bench_dir);

    report::EvaluationOptions opts;
    std::vector<rubric::ScoredCase> scored(cases.size());
    parallel_for(cases.size(), args.jobs, [&](std::size_t i) {
        auto outcome = report::evaluate_tables(cases[i].clean, cases[i].perturbed, opts, nullptr);
        scored[i] = {cases[i].id, outcome.rubric.counts, outcome.rubric.partials};
    });

    std::vector<double> lows = args.lows.empty() ? std::vector<double>{0.0, 0.25} : args.lows;
    std::string csv =
        "low,index,beta_missing,beta_extra,beta_partial,alpha_row,alpha_col,alpha_cell,omega_p,mean_error,tau_vs_"
        "default\n";
    for (double low : lows) {
        auto entries = rubric::sweep_weights(scored, low);
        for (const auto& e : entries) {
            csv += csv_num(low) + "," + std::to_string(e.index) + "," + csv_num(e.config.beta_missing) + "," +
                   csv_num(e.config.beta_extra) + "," + csv_num(e.config.beta_partial) + "," +
                   csv_num(e.config.alpha_row) + "," + csv_num(e.config.alpha_col) + "," +
                   csv_num(e.config.alpha_cell) + "," + csv_num(e.config.omega_p) + "," + csv_num(e.mean_error) +
                   "," + csv_num(e.tau_vs_default) + "\n";
        }
    }
    fs::create_directories(args.out_dir);
    util::write_file_atomic((fs::path(args.out_dir) / "sweep.csv").string(), csv);
    std::cout << "swept " << lows.size() << " low values over " << cases.size() << " cases to " << args.out_dir
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabx: reference-based table evaluation"};
    app.require_subcommand(1);

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Score one candidate table against a reference");
    eval->add_option("gt", eval_args.gt_path, "Reference table (csv/md/json)")->required();
    eval->add_option("cand", eval_args.cand_path, "Candidate table")->required();
    eval->add_option("--weights", eval_args.weights_path, "Weight profile file (JSON or key=value)");
    eval->add_option("-o,--output", eval_args.output, "Write the report here instead of stdout");
    eval->add_option("--format", eval_args.format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "markdown"}));
    eval->add_flag("--pretty", eval_args.pretty, "Render a human-readable summary");
    eval->add_option("--llm", eval_args.llm.mode, "Provider refinement mode")
        ->check(CLI::IsMember({"off", "on", "strict"}));
    eval->add_option("--replay", eval_args.llm.replay, "Transcript replay mode")
        ->check(CLI::IsMember({"off", "prefer", "strict"}));

    PerturbArgs perturb_args;
    auto* pert = app.add_subcommand("perturb", "Generate a seeded perturbation benchmark");
    pert->add_option("input", perturb_args.input_dir, "Directory of clean tables (omit for synthetic)");
    pert->add_option("-o,--output", perturb_args.out_dir, "Benchmark output directory")->required();
    pert->add_option("--seed", perturb_args.seed, "Master seed");
    pert->add_option("--per-table", perturb_args.per_table, "Perturbation cases per clean table");
    pert->add_option("--synthetic", perturb_args.synthetic, "Synthetic clean-table count when no input directory");
    pert->add_option("--mix", perturb_args.mix, "Difficulty shares easy,medium,hard (default 0.44,0.34,0.22)");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Evaluate a benchmark and emit metric CSVs");
    bench->add_option("benchmark", bench_args.bench_dir, "Benchmark directory from perturb");
    bench->add_option("-o,--output", bench_args.out_dir, "Output directory")->required();
    bench->add_option("--weights", bench_args.weights_path, "Weight profile file");
    bench->add_option("--rankings", bench_args.rankings_path, "JSON of human scores per case id");
    bench->add_option("--jobs", bench_args.jobs, "Parallel evaluation threads");
    bench->add_flag("--from-reports", bench_args.from_reports,
                    "Rebuild the CSVs from stored reports instead of re-evaluating");
    bench->add_option("--llm", bench_args.llm.mode, "Provider refinement mode")
        ->check(CLI::IsMember({"off", "on", "strict"}));
    bench->add_option("--replay", bench_args.llm.replay, "Transcript replay mode")
        ->check(CLI::IsMember({"off", "prefer", "strict"}));

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Score a benchmark under all 64 weight toggles");
    sweep->add_option("benchmark", sweep_args.bench_dir, "Benchmark directory from perturb")->required();
    sweep->add_option("-o,--output", sweep_args.out_dir, "Output directory")->required();
    sweep->add_option("--low", sweep_args.lows, "Low weight value(s); default 0 and 0.25");
    sweep->add_option("--jobs", sweep_args.jobs, "Parallel evaluation threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (eval->parsed()) return cmd_eval(eval_args);
        if (pert->parsed()) return cmd_perturb(perturb_args);
        if (bench->parsed()) {
            if (bench_args.bench_dir.empty() && !bench_args.from_reports)
                throw MalformedInput("bench needs a benchmark directory (or --from-reports)");
            return cmd_bench(bench_args);
        }
        if (sweep->parsed()) return cmd_sweep(sweep_args);
    } catch (const Timeout& e) {
        std::cerr << "provider timeout: " << e.what() << "\n";
        return kExitProvider;
    } catch (const ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return 0;
}
