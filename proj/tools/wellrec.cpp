// wellrec: train, apply, and evaluate a factorization-machine well
// recommender over company-well interaction CSVs.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wellrec/dataset.hpp"
#include "wellrec/errors.hpp"
#include "wellrec/eval.hpp"
#include "wellrec/fm_model.hpp"
#include "wellrec/io.hpp"
#include "wellrec/ranker.hpp"
#include "wellrec/train.hpp"

namespace {

// exit-code taxonomy: 2 usage/config, 3 ingestion, 4 numeric, 5 mismatch
constexpr int kExitUsage = 2;
constexpr int kExitIngestion = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitMismatch = 5;

int fail(int code, const std::string& category, const std::string& msg) {
    std::cerr << "wellrec: error(" << category << "): " << msg << std::endl;
    return code;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw wellrec::ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw wellrec::ConfigError("config line " + std::to_string(lineno) +
                                       " is not key = value: " + line);
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t\r");
            auto z = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, z - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw wellrec::ConfigError("empty key at config line " + std::to_string(lineno));
        out[key] = val;
    }
    return out;
}

struct Params {
    std::string interactions_path;
    std::string wells_path;
    std::string model_path;
    std::string out_path;
    std::string trace_path;
    std::string per_company_path;
    std::string pr_out;
    std::string hist_out;
    std::string operator_id;
    std::string threshold_str = "median";
    std::string relevance_str = "threshold";
    std::string loss_str = "warp";
    std::string schedule_str = "invscaling";
    wellrec::TrainConfig cfg;
    int k = 10;
    int bins = 20;
    std::uint64_t split_seed = 42;
    bool include_observed = false;
    bool extra_columns = false;
};

const std::map<std::string, std::string> kConfigKeys = {
    {"factors", ""},       {"loss", ""},          {"epochs", ""},
    {"learning_rate", ""}, {"schedule", ""},      {"schedule_exponent", ""},
    {"regularization", ""},{"max_samples", ""},   {"init_sigma", ""},
    {"seed", ""},          {"k", ""},             {"split_seed", ""},
};

void apply_config(const std::map<std::string, std::string>& conf, Params& p) {
    for (const auto& [key, val] : conf) {
        if (kConfigKeys.find(key) == kConfigKeys.end())
            throw wellrec::ConfigError("unknown config key: " + key);
        try {
            if (key == "factors") p.cfg.factors = std::stoi(val);
            else if (key == "loss") p.loss_str = val;
            else if (key == "epochs") p.cfg.epochs = std::stoi(val);
            else if (key == "learning_rate") p.cfg.learning_rate = std::stod(val);
            else if (key == "schedule") p.schedule_str = val;
            else if (key == "schedule_exponent") p.cfg.schedule_exponent = std::stod(val);
            else if (key == "regularization") p.cfg.regularization = std::stod(val);
            else if (key == "max_samples") p.cfg.max_samples = std::stoi(val);
            else if (key == "init_sigma") p.cfg.init_sigma = std::stod(val);
            else if (key == "seed") p.cfg.seed = std::stoull(val);
            else if (key == "k") p.k = std::stoi(val);
            else if (key == "split_seed") p.split_seed = std::stoull(val);
        } catch (const std::exception&) {
            throw wellrec::ConfigError("bad value for config key " + key + ": " + val);
        }
    }
}

void finalize_enums(Params& p) {
    if (p.loss_str == "bpr") p.cfg.loss = wellrec::LossKind::bpr;
    else if (p.loss_str == "warp") p.cfg.loss = wellrec::LossKind::warp;
    else throw wellrec::ConfigError("loss must be bpr or warp, got: " + p.loss_str);
    if (p.schedule_str == "constant") p.cfg.schedule = wellrec::Schedule::constant;
    else if (p.schedule_str == "invscaling") p.cfg.schedule = wellrec::Schedule::invscaling;
    else throw wellrec::ConfigError("schedule must be constant or invscaling, got: " + p.schedule_str);
}

wellrec::ThresholdSpec parse_threshold(const std::string& s) {
    if (s == "median") return wellrec::ThresholdSpec::median();
    if (s.rfind("fixed:", 0) == 0) {
        try {
            return wellrec::ThresholdSpec::fixed(std::stod(s.substr(6)));
        } catch (const std::exception&) {
            throw wellrec::ConfigError("bad fixed threshold: " + s);
        }
    }
    if (s.rfind("quantile:", 0) == 0) {
        try {
            return wellrec::ThresholdSpec::quantile(std::stod(s.substr(9)));
        } catch (const std::exception&) {
            throw wellrec::ConfigError("bad quantile threshold: " + s);
        }
    }
    throw wellrec::ConfigError("threshold must be median, fixed:<v>, or quantile:<q>, got: " + s);
}

struct LoadedData {
    wellrec::InteractionSet interactions;
    wellrec::WellFeatureTable table;
};

LoadedData load_data(const Params& p) {
    LoadedData d;
    d.interactions = wellrec::load_interactions(p.interactions_path);
    if (d.interactions.duplicate_count > 0)
        std::cerr << "wellrec: warning: collapsed " << d.interactions.duplicate_count
                  << " duplicate interaction(s)" << std::endl;
    auto raw = wellrec::load_well_features(p.wells_path, d.interactions, p.extra_columns);
    d.table = wellrec::standardize(raw);
    return d;
}

// per-well mean score across all companies, the classification score
std::vector<double> mean_well_scores(const wellrec::FMModel& model, const LoadedData& d) {
    const int C = d.interactions.num_companies();
    const int I = d.interactions.num_wells();
    std::vector<double> mean(I, 0.0);
    for (int u = 0; u < C; ++u) {
        auto s = wellrec::score_all_wells(model, u, d.interactions, d.table);
        for (int i = 0; i < I; ++i) mean[i] += s[i];
    }
    for (double& m : mean) m /= C;
    return mean;
}

int run_train(const Params& p) {
    LoadedData d = load_data(p);
    auto result = wellrec::train(d.interactions, d.table, p.cfg);
    for (std::size_t e = 0; e < result.trace.size(); ++e) {
        const auto& st = result.trace[e];
        std::printf("epoch %zu: objective %.6f, lr %.6f, violation rate %.4f\n", e, st.objective,
                    st.learning_rate, st.violation_rate);
    }
    wellrec::save_model(result.model, p.model_path);
    if (!p.trace_path.empty()) wellrec::write_loss_trace_csv(p.trace_path, result.trace);
    std::printf("model written to %s\n", p.model_path.c_str());
    return 0;
}

int run_recommend(const Params& p) {
    LoadedData d = load_data(p);
    auto model = wellrec::load_model(p.model_path);
    std::vector<int> companies;
    if (!p.operator_id.empty()) {
        int u = d.interactions.company_index(p.operator_id);
        if (u < 0) throw wellrec::ConfigError("unknown operator id: " + p.operator_id);
        companies.push_back(u);
    } else {
        for (int u = 0; u < d.interactions.num_companies(); ++u) companies.push_back(u);
    }
    std::vector<wellrec::RankedList> lists;
    for (int u : companies)
        lists.push_back(wellrec::recommend_top_k(model, u, p.k, d.interactions, d.table,
                                                 !p.include_observed));
    if (!p.out_path.empty()) {
        wellrec::write_recommendations_csv(p.out_path, lists, d.interactions);
        std::printf("recommendations written to %s\n", p.out_path.c_str());
    } else {
        for (const auto& list : lists)
            for (std::size_t r = 0; r < list.entries.size(); ++r)
                std::printf("%s,%zu,%s,%.17g\n",
                            d.interactions.company_ids[list.company_index].c_str(), r + 1,
                            d.interactions.well_ids[list.entries[r].first].c_str(),
                            list.entries[r].second);
    }
    return 0;
}

int run_evaluate(const Params& p) {
    LoadedData d = load_data(p);
    auto model = wellrec::load_model(p.model_path);
    auto split = wellrec::split_leave_one_out(d.interactions, p.split_seed);
    auto spec = parse_threshold(p.threshold_str);
    wellrec::RelevanceMode mode;
    if (p.relevance_str == "threshold") mode = wellrec::RelevanceMode::threshold;
    else if (p.relevance_str == "holdout") mode = wellrec::RelevanceMode::holdout;
    else throw wellrec::ConfigError("relevance must be threshold or holdout, got: " + p.relevance_str);
    auto report = wellrec::evaluate(model, split, d.table, p.k, spec, mode);
    // metric order: hit rate, reciprocal rank, precision, recall
    std::printf("hit rate: %.6f\n", report.hit_rate);
    std::printf("reciprocal rank: %.6f\n", report.mean_reciprocal_rank);
    std::printf("precision: %.6f\n", report.precision_at_k);
    std::printf("recall: %.6f\n", report.recall_at_k);
    std::printf("k: %d, relevance mode: %s, recall-skipped companies: %d\n", report.k,
                wellrec::to_string(report.relevance_mode).c_str(),
                report.recall_skipped_companies);
    if (!p.out_path.empty()) wellrec::write_eval_report_csv(p.out_path, report);
    if (!p.per_company_path.empty())
        wellrec::write_per_company_csv(p.per_company_path, report, d.interactions);
    return 0;
}

int run_classify(const Params& p) {
    LoadedData d = load_data(p);
    auto model = wellrec::load_model(p.model_path);
    auto scores = mean_well_scores(model, d);
    auto spec = parse_threshold(p.threshold_str);
    double thr = wellrec::relevance_threshold(scores, spec);
    auto classification = wellrec::classify_wells(scores, thr);
    std::printf("threshold: %.6f, desirable: %d, undesirable: %d\n", thr,
                classification.desirable_count, classification.undesirable_count);
    if (!p.out_path.empty()) {
        wellrec::write_classification_csv(p.out_path, classification, d.interactions);
        std::printf("classification written to %s\n", p.out_path.c_str());
    }
    return 0;
}

int run_plot_data(const Params& p) {
    LoadedData d = load_data(p);
    auto model = wellrec::load_model(p.model_path);

    // PR data: pooled candidate scores across holdout companies, with the
    // held-out well as the positive label
    auto split = wellrec::split_leave_one_out(d.interactions, p.split_seed);
    std::vector<double> scores;
    std::vector<bool> labels;
    for (const auto& [u, held] : split.holdout) {
        auto s = wellrec::score_all_wells(model, u, split.train, d.table);
        auto observed = split.train.wells_of(u);
        for (int i = 0; i < d.interactions.num_wells(); ++i) {
            if (std::binary_search(observed.begin(), observed.end(), i)) continue;
            scores.push_back(s[i]);
            labels.push_back(i == held);
        }
    }
    auto curve = wellrec::pr_curve(scores, labels);
    wellrec::write_pr_curve_csv(p.pr_out, curve);

    // class-separation data: per-well mean scores, median threshold
    auto well_scores = mean_well_scores(model, d);
    double thr = wellrec::relevance_threshold(well_scores, parse_threshold(p.threshold_str));
    auto classification = wellrec::classify_wells(well_scores, thr);
    auto hist = wellrec::class_separation_export(classification, p.bins);
    wellrec::write_histogram_csv(p.hist_out, hist);
    std::printf("pr-curve written to %s\nclass-separation written to %s\n", p.pr_out.c_str(),
                p.hist_out.c_str());
    return 0;
}

int run_inspect(const Params& p) {
    auto model = wellrec::load_model(p.model_path);
    const auto& c = model.config;
    std::printf("model: %s\n", p.model_path.c_str());
    std::printf("format version: %d\n", wellrec::kModelFormatVersion);
    std::printf("n: %d\nk: %d\n", model.n, model.k);
    std::printf("loss: %s\n", wellrec::to_string(c.loss).c_str());
    std::printf("epochs: %d\n", c.epochs);
    std::printf("learning_rate: %g\n", c.learning_rate);
    std::printf("schedule: %s\n", wellrec::to_string(c.schedule).c_str());
    std::printf("schedule_exponent: %g\n", c.schedule_exponent);
    std::printf("regularization: %g\n", c.regularization);
    std::printf("max_samples: %d\n", c.max_samples);
    std::printf("init_sigma: %g\n", c.init_sigma);
    std::printf("seed: %llu\n", static_cast<unsigned long long>(c.seed));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    Params p;
    std::string config_path;

    // pre-scan for --config so file values sit between defaults and flags
    for (int a = 1; a < argc - 1; ++a)
        if (std::string(argv[a]) == "--config") config_path = argv[a + 1];
    try {
        if (!config_path.empty()) apply_config(read_config_file(config_path), p);
    } catch (const wellrec::ConfigError& e) {
        return fail(kExitUsage, "config", e.what());
    }

    CLI::App app{"factorization-machine well recommender"};
    app.require_subcommand(1);
    std::string dummy_config;
    app.add_option("--config", dummy_config, "key = value config file");

    auto add_data_opts = [&](CLI::App* sub) {
        sub->add_option("--interactions", p.interactions_path, "interactions.csv path")->required();
        sub->add_option("--wells", p.wells_path, "wells.csv path")->required();
        sub->add_flag("--extra-columns", p.extra_columns,
                      "append extra numeric wells.csv columns as features");
    };
    auto add_hyper_opts = [&](CLI::App* sub) {
        sub->add_option("--factors", p.cfg.factors, "latent factor count");
        sub->add_option("--loss", p.loss_str, "bpr or warp");
        sub->add_option("--epochs", p.cfg.epochs, "training epochs");
        sub->add_option("--learning-rate", p.cfg.learning_rate, "initial learning rate");
        sub->add_option("--schedule", p.schedule_str, "constant or invscaling");
        sub->add_option("--schedule-exponent", p.cfg.schedule_exponent, "invscaling exponent");
        sub->add_option("--lambda", p.cfg.regularization, "L2 regularization weight");
        sub->add_option("--max-samples", p.cfg.max_samples, "warp negative-sample cap");
        sub->add_option("--init-sigma", p.cfg.init_sigma, "factor init stddev");
        sub->add_option("--seed", p.cfg.seed, "training seed");
    };

    CLI::App* train = app.add_subcommand("train", "train a model");
    add_data_opts(train);
    add_hyper_opts(train);
    train->add_option("--model", p.model_path, "output model file")->required();
    train->add_option("--trace", p.trace_path, "loss-trace CSV output");

    CLI::App* recommend = app.add_subcommand("recommend", "top-k recommendations");
    add_data_opts(recommend);
    recommend->add_option("--model", p.model_path, "model file")->required();
    recommend->add_option("--k", p.k, "list length");
    recommend->add_option("--operator", p.operator_id, "single operator id (default: all)");
    recommend->add_option("--out", p.out_path, "recommendations CSV output");
    recommend->add_flag("--include-observed", p.include_observed,
                        "do not exclude observed training wells");

    CLI::App* evaluate = app.add_subcommand("evaluate", "leave-one-out metrics");
    add_data_opts(evaluate);
    evaluate->add_option("--model", p.model_path, "model file")->required();
    evaluate->add_option("--k", p.k, "recommendation list length");
    evaluate->add_option("--split-seed", p.split_seed, "leave-one-out split seed");
    evaluate->add_option("--threshold", p.threshold_str, "median, fixed:<v>, or quantile:<q>");
    evaluate->add_option("--relevance", p.relevance_str, "threshold or holdout");
    evaluate->add_option("--report", p.out_path, "metrics CSV output");
    evaluate->add_option("--per-company", p.per_company_path, "per-company CSV output");

    CLI::App* classify = app.add_subcommand("classify", "desirability classification");
    add_data_opts(classify);
    classify->add_option("--model", p.model_path, "model file")->required();
    classify->add_option("--threshold", p.threshold_str, "median, fixed:<v>, or quantile:<q>");
    classify->add_option("--out", p.out_path, "classification CSV output");

    CLI::App* plot = app.add_subcommand("plot-data", "export PR-curve and class-separation CSVs");
    add_data_opts(plot);
    plot->add_option("--model", p.model_path, "model file")->required();
    plot->add_option("--split-seed", p.split_seed, "leave-one-out split seed");
    plot->add_option("--threshold", p.threshold_str, "class-separation threshold spec");
    plot->add_option("--bins", p.bins, "histogram bin count");
    plot->add_option("--pr-out", p.pr_out, "PR-curve CSV output")->required();
    plot->add_option("--hist-out", p.hist_out, "class-separation CSV output")->required();

    CLI::App* inspect = app.add_subcommand("inspect", "print model provenance");
    inspect->add_option("--model", p.model_path, "model file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "wellrec: error(usage): " << e.what() << std::endl;
        return kExitUsage;
    }

    try {
        finalize_enums(p);
        p.cfg.validate();
        if (p.k < 1) throw wellrec::ConfigError("k must be >= 1");
        if (train->parsed()) return run_train(p);
        if (recommend->parsed()) return run_recommend(p);
        if (evaluate->parsed()) return run_evaluate(p);
        if (classify->parsed()) return run_classify(p);
        if (plot->parsed()) return run_plot_data(p);
        if (inspect->parsed()) return run_inspect(p);
        return fail(kExitUsage, "usage", "no subcommand");
    } catch (const wellrec::ConfigError& e) {
        return fail(kExitUsage, "config", e.what());
    } catch (const wellrec::MismatchError& e) {
        return fail(kExitMismatch, "mismatch", e.what());
    } catch (const wellrec::NumericError& e) {
        return fail(kExitNumeric, "numeric", e.what());
    } catch (const wellrec::IoError& e) {
        return fail(kExitIngestion, "ingestion", e.what());
    } catch (const wellrec::SchemaError& e) {
        return fail(kExitIngestion, "ingestion", e.what());
    } catch (const wellrec::EmptyDatasetError& e) {
        return fail(kExitIngestion, "ingestion", e.what());
    } catch (const wellrec::CoverageError& e) {
        return fail(kExitIngestion, "ingestion", e.what());
    } catch (const wellrec::ParseError& e) {
        return fail(kExitIngestion, "ingestion", e.what());
    } catch (const wellrec::FormatError& e) {
        return fail(kExitIngestion, "model-format", e.what());
    } catch (const wellrec::VersionError& e) {
        return fail(kExitIngestion, "model-version", e.what());
    } catch (const wellrec::Error& e) {
        return fail(1, "runtime", e.what());
    }
}
