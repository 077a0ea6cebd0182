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
#ifndef CDRNET_H
#define CDRNET_H

/*
 * C interface to the cdrnet pipeline: synthetic data, featurization of call
 * detail records into weekly activity tensors, training of the convolutional
 * network, the averaging and SVM prediction heads, and evaluation.
 *
 * Objects are opaque handles released with their matching *_free function.
 * Every fallible call returns a cdrnet_status; on failure a message is
 * available from cdrnet_last_error() on the same thread until the next call.
 * Strings returned through char** out-parameters are owned by the caller and
 * released with cdrnet_string_free().
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CDRNET_BUILDING_LIBRARY)
#    define CDRNET_API __declspec(dllexport)
#  else
#    define CDRNET_API __declspec(dllimport)
#  endif
#else
#  define CDRNET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cdrnet_status {
    CDRNET_OK = 0,
    CDRNET_ERR_USAGE = 1,   /* invalid argument or configuration */
    CDRNET_ERR_DATA = 2,    /* unreadable, malformed or inconsistent input */
    CDRNET_ERR_NUMERIC = 3, /* non-finite values, failed gradient check */
    CDRNET_ERR_INTERNAL = 4
} cdrnet_status;

typedef enum cdrnet_attribute { CDRNET_ATTRIBUTE_GENDER = 0, CDRNET_ATTRIBUTE_AGE = 1 } cdrnet_attribute;

typedef enum cdrnet_head { CDRNET_HEAD_AVERAGE = 0, CDRNET_HEAD_SVM = 1 } cdrnet_head;

#define CDRNET_MAX_AGE_EDGES 16
#define CDRNET_WEEK_TENSOR_SIZE 1344 /* 8 channels x 24 hours x 7 days */

typedef struct cdrnet_tensors cdrnet_tensors;
typedef struct cdrnet_labels cdrnet_labels;
typedef struct cdrnet_model cdrnet_model;

typedef struct cdrnet_net_config {
    int filters[6]; /* conv1..conv6 */
    int dense[2];   /* dense7, dense8 */
    double alpha;   /* leaky ReLU slope */
} cdrnet_net_config;

typedef struct cdrnet_train_options {
    cdrnet_net_config net;
    cdrnet_attribute attribute;
    int age_edges[CDRNET_MAX_AGE_EDGES];
    int n_age_edges;
    double learning_rate;
    double momentum;
    double weight_decay;
    double validation_fraction;
    int batch_size;
    int epochs;
    uint64_t seed;
    const char* history_path; /* JSON lines, one per epoch; may be NULL */
} cdrnet_train_options;

typedef struct cdrnet_svm_options {
    double lambda;
    int epochs;
    uint64_t seed;
} cdrnet_svm_options;

typedef struct cdrnet_synth_options {
    int users;
    int weeks_per_user;
    int age_edges[CDRNET_MAX_AGE_EDGES];
    int n_age_edges;
    double female_ratio;
    double signal;
    int contact_pool;
    double event_rate;
    uint64_t seed;
    uint64_t archetype_seed;
    int first_user;
} cdrnet_synth_options;

typedef struct cdrnet_eval_options {
    cdrnet_attribute attribute;
    int age_edges[CDRNET_MAX_AGE_EDGES];
    int n_age_edges;
    const cdrnet_model* model; /* when set, its target encoding overrides the fields above */
} cdrnet_eval_options;

CDRNET_API const char* cdrnet_version(void);
CDRNET_API const char* cdrnet_last_error(void);
CDRNET_API void cdrnet_string_free(char* s);

CDRNET_API void cdrnet_net_config_default(cdrnet_net_config* config);
CDRNET_API void cdrnet_train_options_default(cdrnet_train_options* options);
CDRNET_API void cdrnet_svm_options_default(cdrnet_svm_options* options);
CDRNET_API void cdrnet_synth_options_default(cdrnet_synth_options* options);
CDRNET_API void cdrnet_eval_options_default(cdrnet_eval_options* options);

/* Writes a synthetic CDR file and labels file. */
CDRNET_API cdrnet_status cdrnet_synth(const cdrnet_synth_options* options, const char* cdr_path,
                                      const char* labels_path);

/* CDR CSV -> CDRTENSOR/1 file. The ingest report (JSON) is returned through
 * report_json when it is non-NULL. */
CDRNET_API cdrnet_status cdrnet_featurize(const char* cdr_path, int include_empty_weeks, const char* tensors_path,
                                          char** report_json);

CDRNET_API cdrnet_status cdrnet_tensors_load(const char* path, cdrnet_tensors** out);
CDRNET_API void cdrnet_tensors_free(cdrnet_tensors* tensors);
CDRNET_API size_t cdrnet_tensors_weeks(const cdrnet_tensors* tensors);
CDRNET_API size_t cdrnet_tensors_users(const cdrnet_tensors* tensors);
/* Copies week `index`: its user id (valid while the handle lives), the
 * Monday it starts on as days since 1970-01-01, and the raw values. */
CDRNET_API cdrnet_status cdrnet_tensors_get(const cdrnet_tensors* tensors, size_t index, const char** user_id,
                                            int64_t* week_start_days, double* values, size_t n_values);

CDRNET_API cdrnet_status cdrnet_labels_load(const char* path, cdrnet_labels** out, char** report_json);
CDRNET_API void cdrnet_labels_free(cdrnet_labels* labels);
CDRNET_API size_t cdrnet_labels_count(const cdrnet_labels* labels);

CDRNET_API cdrnet_status cdrnet_train(const cdrnet_tensors* tensors, const cdrnet_labels* labels,
                                      const cdrnet_train_options* options, cdrnet_model** out);
/* Trains the ConvNet-feature SVM head and stores it in the model. */
CDRNET_API cdrnet_status cdrnet_train_svm(cdrnet_model* model, const cdrnet_tensors* tensors,
                                          const cdrnet_labels* labels, const cdrnet_svm_options* options);

CDRNET_API cdrnet_status cdrnet_model_load(const char* path, cdrnet_model** out);
CDRNET_API cdrnet_status cdrnet_model_save(const cdrnet_model* model, const char* path);
CDRNET_API void cdrnet_model_free(cdrnet_model* model);
CDRNET_API int cdrnet_model_classes(const cdrnet_model* model);
CDRNET_API int cdrnet_model_has_svm(const cdrnet_model* model);
CDRNET_API const char* cdrnet_model_class_label(const cdrnet_model* model, int index);
/* Class probabilities for one raw week tensor. */
CDRNET_API cdrnet_status cdrnet_model_predict_week(const cdrnet_model* model, const double* values, size_t n_values,
                                                   double* probs, size_t n_probs);

/* Writes the predictions CSV "user_id,predicted_class,p_0,...". */
CDRNET_API cdrnet_status cdrnet_predict(const cdrnet_model* model, const cdrnet_tensors* tensors, cdrnet_head head,
                                        const char* out_csv_path);

/* Scores one or more prediction files against a labels file. head_names
 * label the rows of the accuracy table. report_path (JSON), report_json and
 * table_text are each optional. */
CDRNET_API cdrnet_status cdrnet_evaluate(const char* labels_path, const char* const* prediction_paths,
                                         const char* const* head_names, size_t n_heads,
                                         const cdrnet_eval_options* options, const char* report_path,
                                         char** report_json, char** table_text);

/* Finite-difference check of the reduced 2x10x7 network. config may be NULL
 * (two filters per layer, dense 5 and 4). Returns CDRNET_ERR_NUMERIC when the
 * error is not below 1e-4; *max_relative_error is set either way. */
CDRNET_API cdrnet_status cdrnet_gradcheck(const cdrnet_net_config* config, uint64_t seed,
                                          double* max_relative_error);

#ifdef __cplusplus
}
#endif

#endif /* CDRNET_H */
