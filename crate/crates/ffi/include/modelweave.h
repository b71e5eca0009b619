#ifndef MODELWEAVE_H
#define MODELWEAVE_H

#include <stdbool.h>
#include <stddef.h>

typedef enum MwStatus {
  MW_STATUS_OK = 0,
  MW_STATUS_NULL_POINTER = 1,
  MW_STATUS_INVALID_UTF8 = 2,
  MW_STATUS_PARSE_ERROR = 3,
  MW_STATUS_INVALID_MODEL = 4,
  MW_STATUS_UNRESOLVED = 5,
  MW_STATUS_WEAVE_FAILED = 6,
  MW_STATUS_REQUIREMENT_ERROR = 7,
  MW_STATUS_PANIC = 8,
} MwStatus;

typedef struct MwAspects MwAspects;

typedef struct MwCore MwCore;

typedef struct MwGraph MwGraph;

typedef struct MwWeaving MwWeaving;

typedef struct MwWoven MwWoven;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until
// the next call into the library from the same thread.
const char *mw_last_error(void);

const char *mw_version(void);

void mw_string_free(char *s);

enum MwStatus mw_core_parse(const char *source, struct MwCore **result);

void mw_core_free(struct MwCore *h);

enum MwStatus mw_aspects_parse(const char *source, struct MwAspects **result);

void mw_aspects_free(struct MwAspects *h);

enum MwStatus mw_weaving_parse(const char *source, struct MwWeaving **result);

void mw_weaving_free(struct MwWeaving *h);

enum MwStatus mw_graph_parse(const char *source, struct MwGraph **result);

void mw_graph_free(struct MwGraph *h);

// Number of violations in `core`. When `report` is non-null it receives the
// rendered report, one violation per line.
enum MwStatus mw_core_validate(const struct MwCore *core, size_t *violations, char **report);

enum MwStatus mw_core_print(const struct MwCore *core, char **result);

enum MwStatus mw_core_export_structured(const struct MwCore *core, char **result);

enum MwStatus mw_core_export_diagram(const struct MwCore *core, char **result);

// Runs every core+additional weaving, then every core+aspect weaving. Each
// model array pairs index-wise with its weaving array.
enum MwStatus mw_weave(const struct MwCore *core,
                       const struct MwCore *const *additional,
                       const struct MwWeaving *const *additional_weavings,
                       size_t n_additional,
                       const struct MwAspects *const *aspects,
                       const struct MwWeaving *const *aspect_weavings,
                       size_t n_aspects,
                       bool force_first,
                       struct MwWoven **result);

void mw_woven_free(struct MwWoven *h);

// Core syntax followed by ordering and provenance annotations.
enum MwStatus mw_woven_print(const struct MwWoven *woven, char **result);

enum MwStatus mw_woven_export_structured(const struct MwWoven *woven, char **result);

enum MwStatus mw_woven_export_diagram(const struct MwWoven *woven, char **result);

// A copy of the woven class diagram without annotations.
enum MwStatus mw_woven_core(const struct MwWoven *woven, struct MwCore **result);

enum MwStatus mw_woven_constraint_count(const struct MwWoven *woven, size_t *count);

// Truth value of `cr` when exactly the `n` named leaves hold.
enum MwStatus mw_graph_evaluate(const struct MwGraph *graph,
                                const char *cr,
                                const char *const *satisfied,
                                size_t n,
                                bool *result);

enum MwStatus mw_graph_is_inferable(const struct MwGraph *graph,
                                    const char *target,
                                    const char *const *given,
                                    size_t n,
                                    size_t max_leaves,
                                    bool *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MODELWEAVE_H */
