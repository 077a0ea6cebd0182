/* Copyright 2026 The cdrnet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
// cdrnet command line tool. Talks to the library only through the C API.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cdrnet/cdrnet.h"

namespace {

int fail(cdrnet_status status) {
    std::cerr << "error: " << cdrnet_last_error() << '\n';
    return static_cast<int>(status);
}

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { cdrnet_string_free(ptr); }
};

bool copy_edges(const std::vector<int>& edges, int* out, int* n) {
    if (edges.empty() || edges.size() > CDRNET_MAX_AGE_EDGES) return false;
    std::copy(edges.begin(), edges.end(), out);
    *n = static_cast<int>(edges.size());
    return true;
}

cdrnet_attribute to_attribute(const std::string& s) {
    return s == "age" ? CDRNET_ATTRIBUTE_AGE : CDRNET_ATTRIBUTE_GENDER;
}

struct NetFlags {
    std::vector<int> filters;
    std::vector<int> dense;
    double alpha = 0.01;

    void add(CLI::App* cmd) {
        cmd->add_option("--filters", filters, "Conv filter counts f1,...,f6")->delimiter(',')->expected(6);
        cmd->add_option("--dense", dense, "Dense widths d7,d8")->delimiter(',')->expected(2);
        cmd->add_option("--alpha", alpha, "Leaky ReLU slope")->capture_default_str();
    }

    void apply(cdrnet_net_config& c) const {
        if (!filters.empty()) std::copy(filters.begin(), filters.end(), c.filters);
        if (!dense.empty()) std::copy(dense.begin(), dense.end(), c.dense);
        c.alpha = alpha;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cdrnet: demographic prediction from call-detail-record activity tensors"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cdrnet_version());

    // synth
    cdrnet_synth_options synth;
    cdrnet_synth_options_default(&synth);
    std::string synth_cdr, synth_labels;
    std::vector<int> synth_edges{28, 38, 48};
    auto* c_synth = app.add_subcommand("synth", "Generate a synthetic labeled CDR dataset");
    c_synth->add_option("--cdr", synth_cdr, "Output CDR CSV")->required();
    c_synth->add_option("--labels", synth_labels, "Output labels CSV")->required();
    c_synth->add_option("--users", synth.users, "Number of users")->capture_default_str();
    c_synth->add_option("--weeks", synth.weeks_per_user, "Weeks per user")->capture_default_str();
    c_synth->add_option("--age-edges", synth_edges, "Age bucket edges a,b,c")->delimiter(',');
    c_synth->add_option("--gender-ratio", synth.female_ratio, "Fraction of users with gender f")->capture_default_str();
    c_synth->add_option("--signal", synth.signal, "Signal strength in [0,1]")->capture_default_str();
    c_synth->add_option("--contacts", synth.contact_pool, "Contact pool size per user")->capture_default_str();
    c_synth->add_option("--event-rate", synth.event_rate, "Expected events per user-week")->capture_default_str();
    c_synth->add_option("--seed", synth.seed, "Sampling seed")->capture_default_str();
    c_synth->add_option("--archetype-seed", synth.archetype_seed, "Seed of the class archetypes")->capture_default_str();
    c_synth->add_option("--first-user", synth.first_user, "Index of the first user id")->capture_default_str();

    // featurize
    std::string feat_cdr, feat_out, feat_report;
    bool include_empty = false;
    auto* c_feat = app.add_subcommand("featurize", "Convert a CDR file into a CDRTENSOR/1 tensor file");
    c_feat->add_option("--cdr", feat_cdr, "Input CDR CSV")->required();
    c_feat->add_option("--out", feat_out, "Output tensor file")->required();
    c_feat->add_option("--report", feat_report, "Write the ingest report (JSON) here instead of stderr");
    c_feat->add_flag("--include-empty-weeks", include_empty, "Keep silent weeks between a user's active weeks");

    // train
    cdrnet_train_options train;
    cdrnet_train_options_default(&train);
    std::string train_tensors, train_labels, train_out, train_history, train_attr = "gender";
    std::vector<int> train_edges{28, 38, 48};
    NetFlags train_net;
    auto* c_train = app.add_subcommand("train", "Train the ConvNet on a tensor file and labels");
    c_train->add_option("--tensors", train_tensors, "Input tensor file")->required();
    c_train->add_option("--labels", train_labels, "Labels CSV")->required();
    c_train->add_option("--out", train_out, "Output model file")->required();
    c_train->add_option("--attribute", train_attr, "Target attribute")
        ->check(CLI::IsMember({"gender", "age"}))
        ->capture_default_str();
    c_train->add_option("--age-edges", train_edges, "Age bucket edges a,b,c")->delimiter(',');
    c_train->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
    c_train->add_option("--lr", train.learning_rate, "Learning rate")->capture_default_str();
    c_train->add_option("--momentum", train.momentum, "Momentum")->capture_default_str();
    c_train->add_option("--batch", train.batch_size, "Mini-batch size")->capture_default_str();
    c_train->add_option("--weight-decay", train.weight_decay, "L2 weight decay")->capture_default_str();
    c_train->add_option("--val-fraction", train.validation_fraction, "Fraction of users held out for validation")
        ->capture_default_str();
    c_train->add_option("--seed", train.seed, "Seed")->capture_default_str();
    c_train->add_option("--history", train_history, "Write per-epoch history (JSON lines) here");
    train_net.add(c_train);

    // predict
    std::string pred_model, pred_tensors, pred_out, pred_head = "avg";
    auto* c_pred = app.add_subcommand("predict", "Predict one class per user");
    c_pred->add_option("--model", pred_model, "Model file")->required();
    c_pred->add_option("--tensors", pred_tensors, "Tensor file")->required();
    c_pred->add_option("--out", pred_out, "Output predictions CSV")->required();
    c_pred->add_option("--head", pred_head, "avg: softmax averaging, svm: ConvNet features + SVM")
        ->check(CLI::IsMember({"avg", "svm"}))
        ->capture_default_str();

    // train-svm
    cdrnet_svm_options svm;
    cdrnet_svm_options_default(&svm);
    std::string svm_model, svm_tensors, svm_labels, svm_out;
    auto* c_svm = app.add_subcommand("train-svm", "Train the SVM head on ConvNet features and store it in the model");
    c_svm->add_option("--model", svm_model, "Model file (updated in place unless --out is given)")->required();
    c_svm->add_option("--tensors", svm_tensors, "Tensor file")->required();
    c_svm->add_option("--labels", svm_labels, "Labels CSV")->required();
    c_svm->add_option("--out", svm_out, "Output model file");
    c_svm->add_option("--lambda", svm.lambda, "Regularization strength")->capture_default_str();
    c_svm->add_option("--epochs", svm.epochs, "SVM epochs")->capture_default_str();
    c_svm->add_option("--seed", svm.seed, "Seed")->capture_default_str();

    // evaluate
    std::string eval_preds, eval_svm_preds, eval_labels, eval_model, eval_out, eval_attr = "gender";
    std::vector<int> eval_edges{28, 38, 48};
    auto* c_eval = app.add_subcommand("evaluate", "Score predictions against labels");
    c_eval->add_option("--predictions", eval_preds, "Predictions CSV of the averaging head")->required();
    c_eval->add_option("--svm-predictions", eval_svm_preds, "Predictions CSV of the SVM head");
    c_eval->add_option("--labels", eval_labels, "Labels CSV")->required();
    c_eval->add_option("--model", eval_model, "Model file supplying the class encoding");
    c_eval->add_option("--attribute", eval_attr, "Target attribute when no model is given")
        ->check(CLI::IsMember({"gender", "age"}))
        ->capture_default_str();
    c_eval->add_option("--age-edges", eval_edges, "Age bucket edges when no model is given")->delimiter(',');
    c_eval->add_option("--out", eval_out, "Write the metrics report (JSON) here");

    // gradcheck
    std::uint64_t gc_seed = 1;
    NetFlags gc_net;
    gc_net.filters = {2, 2, 2, 2, 2, 2};
    gc_net.dense = {5, 4};
    auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference check of the reduced network");
    c_gc->add_option("--seed", gc_seed, "Seed")->capture_default_str();
    gc_net.add(c_gc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        if (!app.get_subcommands().empty()) return app.exit(e);
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (*c_synth) {
        if (!copy_edges(synth_edges, synth.age_edges, &synth.n_age_edges)) return std::cerr << "error: bad --age-edges\n", 1;
        if (auto s = cdrnet_synth(&synth, synth_cdr.c_str(), synth_labels.c_str())) return fail(s);
        return 0;
    }

    if (*c_feat) {
        OwnedString report;
        const auto s = cdrnet_featurize(feat_cdr.c_str(), include_empty ? 1 : 0, feat_out.c_str(), &report.ptr);
        if (report.ptr) {
            if (feat_report.empty()) {
                std::cerr << report.ptr << '\n';
            } else if (FILE* f = std::fopen(feat_report.c_str(), "wb")) {
                std::fprintf(f, "%s\n", report.ptr);
                std::fclose(f);
            } else {
                std::cerr << "error: cannot write report '" << feat_report << "'\n";
                return 2;
            }
        }
        return s ? fail(s) : 0;
    }

    if (*c_train) {
        train.attribute = to_attribute(train_attr);
        if (!copy_edges(train_edges, train.age_edges, &train.n_age_edges)) return std::cerr << "error: bad --age-edges\n", 1;
        train_net.apply(train.net);
        train.history_path = train_history.empty() ? nullptr : train_history.c_str();

        cdrnet_tensors* tensors = nullptr;
        cdrnet_labels* labels = nullptr;
        cdrnet_model* model = nullptr;
        OwnedString label_report;
        auto s = cdrnet_tensors_load(train_tensors.c_str(), &tensors);
        if (!s) s = cdrnet_labels_load(train_labels.c_str(), &labels, &label_report.ptr);
        if (label_report.ptr && s) std::cerr << label_report.ptr << '\n';
        if (!s) s = cdrnet_train(tensors, labels, &train, &model);
        if (!s) s = cdrnet_model_save(model, train_out.c_str());
        const int rc = s ? fail(s) : 0;
        cdrnet_model_free(model);
        cdrnet_labels_free(labels);
        cdrnet_tensors_free(tensors);
        return rc;
    }

    if (*c_pred) {
        cdrnet_model* model = nullptr;
        cdrnet_tensors* tensors = nullptr;
        auto s = cdrnet_model_load(pred_model.c_str(), &model);
        if (!s) s = cdrnet_tensors_load(pred_tensors.c_str(), &tensors);
        if (!s)
            s = cdrnet_predict(model, tensors, pred_head == "svm" ? CDRNET_HEAD_SVM : CDRNET_HEAD_AVERAGE,
                               pred_out.c_str());
        const int rc = s ? fail(s) : 0;
        cdrnet_tensors_free(tensors);
        cdrnet_model_free(model);
        return rc;
    }

    if (*c_svm) {
        cdrnet_model* model = nullptr;
        cdrnet_tensors* tensors = nullptr;
        cdrnet_labels* labels = nullptr;
        auto s = cdrnet_model_load(svm_model.c_str(), &model);
        if (!s) s = cdrnet_tensors_load(svm_tensors.c_str(), &tensors);
        if (!s) s = cdrnet_labels_load(svm_labels.c_str(), &labels, nullptr);
        if (!s) s = cdrnet_train_svm(model, tensors, labels, &svm);
        if (!s) s = cdrnet_model_save(model, (svm_out.empty() ? svm_model : svm_out).c_str());
        const int rc = s ? fail(s) : 0;
        cdrnet_labels_free(labels);
        cdrnet_tensors_free(tensors);
        cdrnet_model_free(model);
        return rc;
    }

    if (*c_eval) {
        cdrnet_eval_options opts;
        cdrnet_eval_options_default(&opts);
        opts.attribute = to_attribute(eval_attr);
        if (!copy_edges(eval_edges, opts.age_edges, &opts.n_age_edges)) return std::cerr << "error: bad --age-edges\n", 1;
        cdrnet_model* model = nullptr;
        if (!eval_model.empty()) {
            if (auto s = cdrnet_model_load(eval_model.c_str(), &model)) return fail(s);
            opts.model = model;
        }
        std::vector<const char*> paths{eval_preds.c_str()};
        std::vector<const char*> names{"ConvNet"};
        if (!eval_svm_preds.empty()) {
            paths.push_back(eval_svm_preds.c_str());
            names.push_back("ConvNet-SVM");
        }
        OwnedString json, table;
        const auto s = cdrnet_evaluate(eval_labels.c_str(), paths.data(), names.data(), paths.size(), &opts,
                                       eval_out.empty() ? nullptr : eval_out.c_str(), &json.ptr, &table.ptr);
        cdrnet_model_free(model);
        if (s) return fail(s);
        std::cout << table.ptr;
        if (eval_out.empty()) std::cout << json.ptr << '\n';
        return 0;
    }

    if (*c_gc) {
        cdrnet_net_config cfg;
        cdrnet_net_config_default(&cfg);
        gc_net.apply(cfg);
        double err = 0.0;
        const auto s = cdrnet_gradcheck(&cfg, gc_seed, &err);
        std::printf("max relative error: %.3e\n", err);
        return s ? fail(s) : 0;
    }
    return 1;
}
