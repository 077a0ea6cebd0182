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
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cdrnet/cdrnet.h"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

namespace {

struct Owned {
    char* s = nullptr;
    ~Owned() { cdrnet_string_free(s); }
};

cdrnet_train_options quick_train(cdrnet_attribute attr) {
    cdrnet_train_options o;
    cdrnet_train_options_default(&o);
    for (int& f : o.net.filters) f = 4;
    o.net.dense[0] = 16;
    o.net.dense[1] = 8;
    o.attribute = attr;
    o.epochs = 3;
    o.seed = 5;
    return o;
}

} // namespace

TEST_SUITE("capi") {

TEST_CASE("defaults and version") {
    CHECK(std::string(cdrnet_version()) == "1.0.0");
    cdrnet_net_config net;
    cdrnet_net_config_default(&net);
    const int filters[] = {16, 16, 16, 16, 32, 64};
    for (int i = 0; i < 6; ++i) CHECK(net.filters[i] == filters[i]);
    CHECK(net.dense[0] == 128);
    CHECK(net.dense[1] == 64);
    CHECK(net.alpha == 0.01);

    cdrnet_train_options t;
    cdrnet_train_options_default(&t);
    CHECK(t.learning_rate == 0.01);
    CHECK(t.momentum == 0.9);
    CHECK(t.batch_size == 32);
    CHECK(t.epochs == 30);
    CHECK(t.validation_fraction == 0.1);
    CHECK(t.n_age_edges == 3);

    cdrnet_svm_options s;
    cdrnet_svm_options_default(&s);
    CHECK(s.lambda == 1e-4);
    CHECK(s.epochs == 50);

    cdrnet_synth_options y;
    cdrnet_synth_options_default(&y);
    CHECK(y.weeks_per_user == 8);
    CHECK(y.contact_pool == 20);
    CHECK(y.event_rate == 60.0);
}

TEST_CASE("full pipeline through the C interface") {
    testing::TempDir dir("capi");
    const auto cdr = dir.file("cdr.csv"), labels = dir.file("labels.csv"), tensors = dir.file("t.bin");
    cdrnet_synth_options so;
    cdrnet_synth_options_default(&so);
    so.users = 40;
    so.weeks_per_user = 2;
    REQUIRE(cdrnet_synth(&so, cdr.c_str(), labels.c_str()) == CDRNET_OK);

    Owned report;
    REQUIRE(cdrnet_featurize(cdr.c_str(), 0, tensors.c_str(), &report.s) == CDRNET_OK);
    const auto rep = nlohmann::json::parse(report.s);
    CHECK(rep["records_rejected"] == 0);
    CHECK(rep["records_accepted"].get<int>() > 0);

    cdrnet_tensors* t = nullptr;
    REQUIRE(cdrnet_tensors_load(tensors.c_str(), &t) == CDRNET_OK);
    CHECK(cdrnet_tensors_users(t) == 40);
    CHECK(cdrnet_tensors_weeks(t) == 80);
    std::vector<double> values(CDRNET_WEEK_TENSOR_SIZE);
    const char* uid = nullptr;
    int64_t start = 0;
    REQUIRE(cdrnet_tensors_get(t, 0, &uid, &start, values.data(), values.size()) == CDRNET_OK);
    CHECK(std::string(uid) == "u000000");
    CHECK(start == 19723); // 2024-01-01
    CHECK(cdrnet_tensors_get(t, 80, &uid, &start, values.data(), values.size()) == CDRNET_ERR_USAGE);
    CHECK(cdrnet_tensors_get(t, 0, &uid, &start, values.data(), 10) == CDRNET_ERR_USAGE);

    cdrnet_labels* l = nullptr;
    REQUIRE(cdrnet_labels_load(labels.c_str(), &l, nullptr) == CDRNET_OK);
    CHECK(cdrnet_labels_count(l) == 40);

    auto opts = quick_train(CDRNET_ATTRIBUTE_GENDER);
    const auto history = dir.file("history.jsonl");
    opts.history_path = history.c_str();
    cdrnet_model* m = nullptr;
    REQUIRE(cdrnet_train(t, l, &opts, &m) == CDRNET_OK);
    CHECK(cdrnet_model_classes(m) == 2);
    CHECK(std::string(cdrnet_model_class_label(m, 0)) == "f");
    CHECK(std::string(cdrnet_model_class_label(m, 1)) == "m");
    CHECK(cdrnet_model_class_label(m, 2) == nullptr);
    CHECK(cdrnet_model_has_svm(m) == 0);
    {
        std::ifstream h(history);
        std::string line;
        int lines = 0;
        while (std::getline(h, line)) {
            const auto j = nlohmann::json::parse(line);
            CHECK(j["epoch"] == ++lines);
        }
        CHECK(lines == 3);
    }

    double probs[2];
    REQUIRE(cdrnet_model_predict_week(m, values.data(), values.size(), probs, 2) == CDRNET_OK);
    CHECK(probs[0] + probs[1] == doctest::Approx(1.0));

    const auto avg = dir.file("avg.csv"), svm = dir.file("svm.csv");
    CHECK(cdrnet_predict(m, t, CDRNET_HEAD_SVM, svm.c_str()) == CDRNET_ERR_USAGE);
    CHECK(std::string(cdrnet_last_error()).find("train-svm") != std::string::npos);
    REQUIRE(cdrnet_predict(m, t, CDRNET_HEAD_AVERAGE, avg.c_str()) == CDRNET_OK);

    cdrnet_svm_options sv;
    cdrnet_svm_options_default(&sv);
    sv.epochs = 5;
    REQUIRE(cdrnet_train_svm(m, t, l, &sv) == CDRNET_OK);
    CHECK(cdrnet_model_has_svm(m) == 1);
    REQUIRE(cdrnet_predict(m, t, CDRNET_HEAD_SVM, svm.c_str()) == CDRNET_OK);

    // same CSV schema for both heads
    std::ifstream a(avg), b(svm);
    std::string ha, hb;
    std::getline(a, ha);
    std::getline(b, hb);
    CHECK(ha == "user_id,predicted_class,p_0,p_1");
    CHECK(ha == hb);

    const auto model_path = dir.file("model.bin");
    REQUIRE(cdrnet_model_save(m, model_path.c_str()) == CDRNET_OK);
    cdrnet_model* m2 = nullptr;
    REQUIRE(cdrnet_model_load(model_path.c_str(), &m2) == CDRNET_OK);
    CHECK(cdrnet_model_has_svm(m2) == 1);
    double probs2[2];
    REQUIRE(cdrnet_model_predict_week(m2, values.data(), values.size(), probs2, 2) == CDRNET_OK);
    CHECK(probs2[0] == probs[0]);
    CHECK(probs2[1] == probs[1]);

    const char* paths[] = {avg.c_str(), svm.c_str()};
    const char* names[] = {"ConvNet", "ConvNet-SVM"};
    cdrnet_eval_options eo;
    cdrnet_eval_options_default(&eo);
    eo.model = m2;
    Owned json, table;
    const auto report_path = dir.file("report.json");
    REQUIRE(cdrnet_evaluate(labels.c_str(), paths, names, 2, &eo, report_path.c_str(), &json.s, &table.s) ==
            CDRNET_OK);
    const auto j = nlohmann::json::parse(json.s);
    CHECK(j["attribute"] == "gender");
    CHECK(j["heads"].size() == 2);
    CHECK(j["heads"][1]["name"] == "ConvNet-SVM");
    CHECK(j["heads"][0]["total"] == 40);
    CHECK(nlohmann::json::parse(std::ifstream(report_path)) == j);
    const std::string tab = table.s;
    CHECK(tab.find("Majority") < tab.find("ConvNet-SVM"));

    cdrnet_model_free(m2);
    cdrnet_model_free(m);
    cdrnet_labels_free(l);
    cdrnet_tensors_free(t);
}

TEST_CASE("error codes") {
    testing::TempDir dir("capi_err");
    cdrnet_tensors* t = nullptr;
    CHECK(cdrnet_tensors_load(dir.file("nope.bin").c_str(), &t) == CDRNET_ERR_DATA);
    CHECK(t == nullptr);
    CHECK(std::string(cdrnet_last_error()).find("nope.bin") != std::string::npos);
    CHECK(cdrnet_tensors_load(nullptr, &t) == CDRNET_ERR_USAGE);

    testing::spit(dir.file("garbage.bin"), "not a tensor file");
    CHECK(cdrnet_tensors_load(dir.file("garbage.bin").c_str(), &t) == CDRNET_ERR_DATA);

    // an empty tensor file loads, but training on it names the file
    const auto cdr = dir.file("empty.csv"), tensors = dir.file("empty.bin"), labels = dir.file("labels.csv");
    testing::spit(cdr, "user_id,direction,kind,timestamp,duration_s,correspondent_id\n");
    testing::spit(labels, "user_id,gender,age_years\na,f,30\nb,m,40\n");
    REQUIRE(cdrnet_featurize(cdr.c_str(), 0, tensors.c_str(), nullptr) == CDRNET_OK);
    REQUIRE(cdrnet_tensors_load(tensors.c_str(), &t) == CDRNET_OK);
    CHECK(cdrnet_tensors_weeks(t) == 0);
    cdrnet_labels* l = nullptr;
    REQUIRE(cdrnet_labels_load(labels.c_str(), &l, nullptr) == CDRNET_OK);
    const auto opts = quick_train(CDRNET_ATTRIBUTE_GENDER);
    cdrnet_model* m = nullptr;
    CHECK(cdrnet_train(t, l, &opts, &m) == CDRNET_ERR_DATA);
    CHECK(m == nullptr);
    CHECK(std::string(cdrnet_last_error()).find("empty.bin") != std::string::npos);

    auto bad = opts;
    bad.batch_size = 0;
    CHECK(cdrnet_train(t, l, &bad, &m) == CDRNET_ERR_USAGE);
    bad = opts;
    bad.net.filters[2] = 0;
    CHECK(cdrnet_train(t, l, &bad, &m) == CDRNET_ERR_USAGE);
    bad = opts;
    bad.n_age_edges = CDRNET_MAX_AGE_EDGES + 1;
    bad.attribute = CDRNET_ATTRIBUTE_AGE;
    CHECK(cdrnet_train(t, l, &bad, &m) == CDRNET_ERR_USAGE);

    testing::spit(dir.file("dup.csv"), "user_id,gender,age_years\na,f,30\na,f,30\n");
    cdrnet_labels* dup = nullptr;
    CHECK(cdrnet_labels_load(dir.file("dup.csv").c_str(), &dup, nullptr) == CDRNET_ERR_DATA);

    cdrnet_model* mm = nullptr;
    testing::spit(dir.file("fake.model"), "CDRNET/2 and then some");
    CHECK(cdrnet_model_load(dir.file("fake.model").c_str(), &mm) == CDRNET_ERR_DATA);
    CHECK(std::string(cdrnet_last_error()).find("version") != std::string::npos);

    cdrnet_labels_free(l);
    cdrnet_tensors_free(t);
    cdrnet_tensors_free(nullptr);
    cdrnet_model_free(nullptr);
    cdrnet_string_free(nullptr);
}

TEST_CASE("gradcheck through the C interface") {
    double err = 1.0;
    CHECK(cdrnet_gradcheck(nullptr, 7, &err) == CDRNET_OK);
    CHECK(err < 1e-4);
    cdrnet_net_config bad;
    cdrnet_net_config_default(&bad);
    bad.alpha = -1.0;
    CHECK(cdrnet_gradcheck(&bad, 1, &err) == CDRNET_ERR_USAGE);
}

TEST_CASE("synth options are validated") {
    testing::TempDir dir("capi_synth");
    cdrnet_synth_options so;
    cdrnet_synth_options_default(&so);
    so.signal = 2.0;
    CHECK(cdrnet_synth(&so, dir.file("c").c_str(), dir.file("l").c_str()) == CDRNET_ERR_USAGE);
    CHECK(cdrnet_synth(nullptr, dir.file("c").c_str(), dir.file("l").c_str()) == CDRNET_ERR_USAGE);
}

}
