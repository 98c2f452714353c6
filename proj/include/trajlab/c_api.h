/* C-compatible boundary for host-language bindings.
 *
 * Every call returns 0 on success and writes a NUL-terminated JSON string to
 * *out, which the caller releases with trajlab_free. On failure the return
 * value is 1 + the core error kind index and *out holds
 * {"error": <kind name>, "message": <text>}. Strings are UTF-8. `thresholds`
 * may be NULL (defaults) or a JSON object of overrides. Calls are reentrant.
 */
#ifndef TRAJLAB_C_API_H
#define TRAJLAB_C_API_H

#ifdef __cplusplus
extern "C" {
#endif

/* One label line, byte-equal to `trajlab label <path>`. */
int trajlab_label_file(const char* path, const char* thresholds, char** out);

/* Labels every input under `paths_json` (a JSON array of files or
 * directories). Writes {"labels": [...], "failures": [...]}. */
int trajlab_label_paths(const char* paths_json, const char* thresholds, unsigned workers, char** out);

/* `labels_jsonl` holds label lines; `spec` a filter spec object. Writes the
 * manifest, equal to `trajlab filter`. */
int trajlab_filter(const char* labels_jsonl, const char* spec, char** out);

/* Writes the tables equal to `trajlab stats --format json`. `group_by` and
 * `grouping` may be NULL or empty. */
int trajlab_stats(const char* labels_jsonl, const char* group_by, const char* grouping, int decimals, char** out);

int trajlab_thresholds_default(char** out);

/* Name of the error kind behind a non-zero return code. */
const char* trajlab_error_kind_name(int code);

void trajlab_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
