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
#include "cdrnet/cdrnet.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>

#include "cdrnet/classify.hpp"
#include "cdrnet/pipeline.hpp"
#include "cdrnet/synthgen.hpp"
#include "cdrnet/tensor_file.hpp"
#include "json.hpp"

struct cdrnet_tensors {
    std::string path;
    cdrnet::TensorDataset data;
    cdrnet::UserWeeks by_user;
};

struct cdrnet_labels {
    std::string path;
    cdrnet::LabelMap labels;
};

struct cdrnet_model {
    cdrnet::Model model;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
cdrnet_status guarded(F&& body) {
    g_last_error.clear();
    try {
        body();
        return CDRNET_OK;
    } catch (const cdrnet::Error& e) {
        g_last_error = e.what();
        return static_cast<cdrnet_status>(e.kind());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
    } catch (const std::exception& e) {
        g_last_error = e.what();
    } catch (...) {
        g_last_error = "unknown error";
    }
    return CDRNET_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
    if (!ok) throw cdrnet::usage_error(what);
}

char* dup_string(const std::string& s) {
    auto* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

std::vector<int> edges_of(const int* edges, int n) {
    require(n >= 1 && n <= CDRNET_MAX_AGE_EDGES, "age edge count out of range");
    return {edges, edges + n};
}

void set_default_edges(int* edges, int* n) {
    const int defaults[] = {28, 38, 48};
    std::memcpy(edges, defaults, sizeof defaults);
    *n = 3;
}

cdrnet::NetworkConfig apply_net(cdrnet::NetworkConfig cfg, const cdrnet_net_config& c) {
    for (int l = 0; l < cdrnet::kConvLayers; ++l) cfg.conv[l].filters = c.filters[l];
    cfg.dense7 = c.dense[0];
    cfg.dense8 = c.dense[1];
    cfg.alpha = c.alpha;
    return cfg;
}

std::ifstream open_text(const char* path, const char* what) {
    require(path != nullptr, "missing path");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cdrnet::data_error(std::string("cannot open ") + what + " '" + path + "'");
    return in;
}

} // namespace

extern "C" {

const char* cdrnet_version(void) { return "1.0.0"; }

const char* cdrnet_last_error(void) { return g_last_error.c_str(); }

void cdrnet_string_free(char* s) { std::free(s); }

void cdrnet_net_config_default(cdrnet_net_config* config) {
    if (!config) return;
    const cdrnet::NetworkConfig d;
    for (int l = 0; l < cdrnet::kConvLayers; ++l) config->filters[l] = d.conv[l].filters;
    config->dense[0] = d.dense7;
    config->dense[1] = d.dense8;
    config->alpha = d.alpha;
}

void cdrnet_train_options_default(cdrnet_train_options* o) {
    if (!o) return;
    *o = cdrnet_train_options{};
    cdrnet_net_config_default(&o->net);
    o->attribute = CDRNET_ATTRIBUTE_GENDER;
    set_default_edges(o->age_edges, &o->n_age_edges);
    const cdrnet::TrainConfig d;
    o->learning_rate = d.learning_rate;
    o->momentum = d.momentum;
    o->weight_decay = d.weight_decay;
    o->validation_fraction = d.validation_fraction;
    o->batch_size = d.batch_size;
    o->epochs = d.epochs;
    o->seed = d.seed;
    o->history_path = nullptr;
}

void cdrnet_svm_options_default(cdrnet_svm_options* o) {
    if (!o) return;
    const cdrnet::SvmTrainOptions d;
    o->lambda = d.lambda;
    o->epochs = d.epochs;
    o->seed = d.seed;
}

void cdrnet_synth_options_default(cdrnet_synth_options* o) {
    if (!o) return;
    *o = cdrnet_synth_options{};
    const cdrnet::SynthConfig d;
    o->users = d.users;
    o->weeks_per_user = d.weeks_per_user;
    set_default_edges(o->age_edges, &o->n_age_edges);
    o->female_ratio = d.female_ratio;
    o->signal = d.signal;
    o->contact_pool = d.contact_pool;
    o->event_rate = d.event_rate;
    o->seed = d.seed;
    o->archetype_seed = d.archetype_seed;
    o->first_user = d.first_user;
}

void cdrnet_eval_options_default(cdrnet_eval_options* o) {
    if (!o) return;
    *o = cdrnet_eval_options{};
    o->attribute = CDRNET_ATTRIBUTE_GENDER;
    set_default_edges(o->age_edges, &o->n_age_edges);
    o->model = nullptr;
}

cdrnet_status cdrnet_synth(const cdrnet_synth_options* o, const char* cdr_path, const char* labels_path) {
    return guarded([&] {
        require(o && cdr_path && labels_path, "synth needs options and two output paths");
        cdrnet::SynthConfig cfg;
        cfg.users = o->users;
        cfg.weeks_per_user = o->weeks_per_user;
        cfg.age_edges = edges_of(o->age_edges, o->n_age_edges);
        cfg.female_ratio = o->female_ratio;
        cfg.signal = o->signal;
        cfg.contact_pool = o->contact_pool;
        cfg.event_rate = o->event_rate;
        cfg.seed = o->seed;
        cfg.archetype_seed = o->archetype_seed;
        cfg.first_user = o->first_user;
        cdrnet::write_synth_files(cdrnet::generate(cfg), cdr_path, labels_path);
    });
}

cdrnet_status cdrnet_featurize(const char* cdr_path, int include_empty_weeks, const char* tensors_path,
                               char** report_json) {
    if (report_json) *report_json = nullptr;
    return guarded([&] {
        require(tensors_path != nullptr, "featurize needs an output path");
        auto in = open_text(cdr_path, "CDR file");
        auto ingested = cdrnet::ingest_cdr(in);
        if (report_json) *report_json = dup_string(cdrnet::report_to_json(ingested.report));

        cdrnet::TensorDataset data;
        data.weeks = cdrnet::featurize_all(ingested.groups, include_empty_weeks != 0);
        if (!data.weeks.empty()) {
            std::vector<const cdrnet::WeekTensor*> all;
            for (const auto& w : data.weeks) all.push_back(&w.tensor);
            data.norm = cdrnet::fit_normalizer(all);
        }
        cdrnet::write_tensor_file(tensors_path, data);
    });
}

cdrnet_status cdrnet_tensors_load(const char* path, cdrnet_tensors** out) {
    return guarded([&] {
        require(path && out, "tensors_load needs a path and an output handle");
        *out = nullptr;
        auto t = std::make_unique<cdrnet_tensors>();
        t->path = path;
        t->data = cdrnet::read_tensor_file(path);
        t->by_user = cdrnet::group_weeks_by_user(t->data.weeks);
        *out = t.release();
    });
}

void cdrnet_tensors_free(cdrnet_tensors* tensors) { delete tensors; }

size_t cdrnet_tensors_weeks(const cdrnet_tensors* t) { return t ? t->data.weeks.size() : 0; }

size_t cdrnet_tensors_users(const cdrnet_tensors* t) { return t ? t->by_user.size() : 0; }

cdrnet_status cdrnet_tensors_get(const cdrnet_tensors* t, size_t index, const char** user_id,
                                 int64_t* week_start_days, double* values, size_t n_values) {
    return guarded([&] {
        require(t != nullptr, "null tensors handle");
        require(index < t->data.weeks.size(), "week index out of range");
        const auto& w = t->data.weeks[index];
        if (user_id) *user_id = w.user_id.c_str();
        if (week_start_days) *week_start_days = w.week.start.time_since_epoch().count();
        if (values) {
            require(n_values == w.tensor.values.size(), "value buffer must hold 1344 doubles");
            std::copy(w.tensor.values.begin(), w.tensor.values.end(), values);
        }
    });
}

cdrnet_status cdrnet_labels_load(const char* path, cdrnet_labels** out, char** report_json) {
    if (report_json) *report_json = nullptr;
    return guarded([&] {
        require(out != nullptr, "labels_load needs an output handle");
        *out = nullptr;
        auto in = open_text(path, "labels file");
        auto ingested = cdrnet::ingest_labels(in);
        if (report_json) *report_json = dup_string(cdrnet::report_to_json(ingested.report));
        auto l = std::make_unique<cdrnet_labels>();
        l->path = path;
        l->labels = std::move(ingested.labels);
        *out = l.release();
    });
}

void cdrnet_labels_free(cdrnet_labels* labels) { delete labels; }

size_t cdrnet_labels_count(const cdrnet_labels* l) { return l ? l->labels.size() : 0; }

cdrnet_status cdrnet_train(const cdrnet_tensors* tensors, const cdrnet_labels* labels,
                           const cdrnet_train_options* o, cdrnet_model** out) {
    return guarded([&] {
        require(tensors && labels && o && out, "train needs tensors, labels, options and an output handle");
        *out = nullptr;
        const auto attribute = o->attribute == CDRNET_ATTRIBUTE_AGE ? cdrnet::Attribute::age : cdrnet::Attribute::gender;
        const cdrnet::AgeBuckets buckets(edges_of(o->age_edges, o->n_age_edges));
        auto net = apply_net(cdrnet::NetworkConfig{}, o->net);
        net.classes = attribute == cdrnet::Attribute::age ? buckets.classes() : 2;
        net.validate();

        cdrnet::TrainConfig tc;
        tc.learning_rate = o->learning_rate;
        tc.momentum = o->momentum;
        tc.weight_decay = o->weight_decay;
        tc.validation_fraction = o->validation_fraction;
        tc.batch_size = o->batch_size;
        tc.epochs = o->epochs;
        tc.seed = o->seed;
        tc.validate();

        if (tensors->data.weeks.empty()) throw cdrnet::data_error("tensor file '" + tensors->path + "' holds no weeks");
        auto data = cdrnet::label_dataset(tensors->by_user, labels->labels, attribute, buckets);
        if (data.users.empty())
            throw cdrnet::data_error("no user in '" + tensors->path + "' has a label in '" + labels->path + "'");

        std::ofstream history;
        if (o->history_path) {
            history.open(o->history_path, std::ios::binary | std::ios::trunc);
            if (!history) throw cdrnet::data_error(std::string("cannot open history file '") + o->history_path + "'");
        }
        auto trained = cdrnet::train_model(data, net, tc,
                                           [&](const cdrnet::EpochRecord& r) {
                                               if (history.is_open()) history << cdrnet::history_line_json(r) << '\n' << std::flush;
                                           });
        *out = new cdrnet_model{std::move(trained.model)};
    });
}

cdrnet_status cdrnet_train_svm(cdrnet_model* model, const cdrnet_tensors* tensors, const cdrnet_labels* labels,
                               const cdrnet_svm_options* o) {
    return guarded([&] {
        require(model && tensors && labels && o, "train_svm needs a model, tensors, labels and options");
        const auto& m = model->model;
        const cdrnet::AgeBuckets buckets = m.attribute == cdrnet::Attribute::age ? cdrnet::AgeBuckets(m.age_edges)
                                                                                 : cdrnet::AgeBuckets();
        auto data = cdrnet::label_dataset(tensors->by_user, labels->labels, m.attribute, buckets);
        if (data.users.empty())
            throw cdrnet::data_error("no user in '" + tensors->path + "' has a label in '" + labels->path + "'");
        cdrnet::attach_svm(model->model, data, {o->lambda, o->epochs, o->seed});
    });
}

cdrnet_status cdrnet_model_load(const char* path, cdrnet_model** out) {
    return guarded([&] {
        require(path && out, "model_load needs a path and an output handle");
        *out = nullptr;
        *out = new cdrnet_model{cdrnet::load_model(path)};
    });
}

cdrnet_status cdrnet_model_save(const cdrnet_model* model, const char* path) {
    return guarded([&] {
        require(model && path, "model_save needs a model and a path");
        cdrnet::save_model(model->model, path);
    });
}

void cdrnet_model_free(cdrnet_model* model) { delete model; }

int cdrnet_model_classes(const cdrnet_model* model) { return model ? model->model.config.classes : 0; }

int cdrnet_model_has_svm(const cdrnet_model* model) { return model && model->model.svm ? 1 : 0; }

const char* cdrnet_model_class_label(const cdrnet_model* model, int index) {
    if (!model || index < 0 || index >= static_cast<int>(model->model.class_labels.size())) return nullptr;
    return model->model.class_labels[index].c_str();
}

cdrnet_status cdrnet_model_predict_week(const cdrnet_model* model, const double* values, size_t n_values,
                                        double* probs, size_t n_probs) {
    return guarded([&] {
        require(model && values && probs, "predict_week needs a model, values and an output buffer");
        require(n_values == CDRNET_WEEK_TENSOR_SIZE, "week tensor must hold 1344 values");
        require(n_probs == static_cast<size_t>(model->model.config.classes), "probability buffer size != classes");
        cdrnet::WeekTensor w;
        std::copy(values, values + n_values, w.values.begin());
        const auto p = cdrnet::week_probabilities(model->model, w);
        std::copy(p.begin(), p.end(), probs);
    });
}

cdrnet_status cdrnet_predict(const cdrnet_model* model, const cdrnet_tensors* tensors, cdrnet_head head,
                             const char* out_csv_path) {
    return guarded([&] {
        require(model && tensors && out_csv_path, "predict needs a model, tensors and an output path");
        const auto preds = cdrnet::predict_users(model->model, tensors->by_user,
                                                 head == CDRNET_HEAD_SVM ? cdrnet::Head::svm : cdrnet::Head::average);
        std::ofstream out(out_csv_path, std::ios::binary | std::ios::trunc);
        if (!out) throw cdrnet::data_error(std::string("cannot open '") + out_csv_path + "' for writing");
        cdrnet::write_predictions_csv(out, preds, model->model.config.classes);
        if (!out) throw cdrnet::data_error(std::string("write failure on '") + out_csv_path + "'");
    });
}

cdrnet_status cdrnet_evaluate(const char* labels_path, const char* const* prediction_paths,
                              const char* const* head_names, size_t n_heads, const cdrnet_eval_options* o,
                              const char* report_path, char** report_json, char** table_text) {
    if (report_json) *report_json = nullptr;
    if (table_text) *table_text = nullptr;
    return guarded([&] {
        require(prediction_paths && n_heads >= 1, "evaluate needs at least one predictions file");
        cdrnet_eval_options defaults;
        cdrnet_eval_options_default(&defaults);
        if (!o) o = &defaults;

        auto labels_in = open_text(labels_path, "labels file");
        const auto labels = cdrnet::ingest_labels(labels_in).labels;

        cdrnet::Attribute attribute;
        cdrnet::AgeBuckets buckets;
        std::vector<std::string> vocab;
        if (o->model) {
            const auto& m = o->model->model;
            attribute = m.attribute;
            if (attribute == cdrnet::Attribute::age) buckets = cdrnet::AgeBuckets(m.age_edges);
            vocab = m.class_labels;
        } else {
            attribute = o->attribute == CDRNET_ATTRIBUTE_AGE ? cdrnet::Attribute::age : cdrnet::Attribute::gender;
            buckets = cdrnet::AgeBuckets(edges_of(o->age_edges, o->n_age_edges));
            vocab = cdrnet::class_vocabulary(attribute, labels, buckets);
        }
        const int classes = static_cast<int>(vocab.size());

        std::vector<cdrnet::UserClass> truth;
        for (const auto& [user, label] : labels)
            truth.emplace_back(user, cdrnet::encode_label(label, attribute, buckets, vocab));

        nlohmann::json report;
        report["attribute"] = std::string(cdrnet::attribute_name(attribute));
        report["class_labels"] = vocab;
        report["heads"] = nlohmann::json::array();
        std::vector<std::pair<std::string, double>> rows;
        double majority = 0.0;
        for (size_t h = 0; h < n_heads; ++h) {
            auto in = open_text(prediction_paths[h], "predictions file");
            const auto preds = cdrnet::read_predictions_csv(in);
            const auto metrics = cdrnet::evaluate(preds, truth, classes);
            const std::string name =
                head_names && head_names[h] ? head_names[h] : "head" + std::to_string(h);
            auto entry = nlohmann::json::parse(cdrnet::metrics_to_json(metrics));
            entry["name"] = name;
            entry["predictions"] = prediction_paths[h];
            report["heads"].push_back(entry);
            rows.emplace_back(name, metrics.accuracy);
            if (h == 0) {
                majority = metrics.majority_baseline;
                report["majority_baseline"] = metrics.majority_baseline;
                report["uniform_baseline"] = metrics.uniform_baseline;
            }
        }
        const auto text = report.dump(2);
        if (report_path) {
            std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
            if (!out) throw cdrnet::data_error(std::string("cannot open '") + report_path + "' for writing");
            out << text << '\n';
        }
        if (report_json) *report_json = dup_string(text);
        if (table_text)
            *table_text = dup_string(cdrnet::format_results_table(
                attribute == cdrnet::Attribute::age ? "Age" : "Gender", majority, rows));
    });
}

cdrnet_status cdrnet_gradcheck(const cdrnet_net_config* config, uint64_t seed, double* max_relative_error) {
    return guarded([&] {
        auto cfg = cdrnet::NetworkConfig::downsized();
        if (config) cfg = apply_net(cfg, *config);
        cfg.validate();
        const double err = cdrnet::grad_check(cfg, seed);
        if (max_relative_error) *max_relative_error = err;
        if (!(err < 1e-4))
            throw cdrnet::numeric_error("gradient check failed: max relative error " + std::to_string(err));
    });
}

} // extern "C"
