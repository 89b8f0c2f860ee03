/* Demonstrates the C interface: parse a dataset, learn a theory, render
 * it, check coverage, classify an interval pair, and fetch a
 * contrastive explanation.
 *
 * Build from crates/ffi after `cargo build -p nearmiss-ffi`:
 *   cc examples/demo.c -Iinclude ../../target/debug/libnearmiss_ffi.a \
 *      -lpthread -ldl -lm -o demo && ./demo
 */
#include <stdio.h>

#include "nearmiss.h"

static const char *DATASET =
    "{"
    "\"classes\":[\"disgust\",\"pain\"],"
    "\"sequences\":["
    "{\"id\":\"p1\",\"label\":\"pain\",\"events\":["
    "{\"e\":\"e1\",\"au\":4,\"on\":0,\"off\":5,\"int\":\"c\"},"
    "{\"e\":\"e2\",\"au\":1,\"on\":6,\"off\":9,\"int\":\"a\"}]},"
    "{\"id\":\"p2\",\"label\":\"pain\",\"events\":["
    "{\"e\":\"e1\",\"au\":4,\"on\":2,\"off\":7,\"int\":\"c\"},"
    "{\"e\":\"e2\",\"au\":2,\"on\":8,\"off\":11,\"int\":\"b\"}]},"
    "{\"id\":\"d1\",\"label\":\"disgust\",\"events\":["
    "{\"e\":\"e1\",\"au\":9,\"on\":1,\"off\":4,\"int\":\"b\"},"
    "{\"e\":\"e2\",\"au\":1,\"on\":5,\"off\":8,\"int\":\"a\"}]},"
    "{\"id\":\"d2\",\"label\":\"disgust\",\"events\":["
    "{\"e\":\"e1\",\"au\":9,\"on\":3,\"off\":9,\"int\":\"b\"},"
    "{\"e\":\"e2\",\"au\":2,\"on\":10,\"off\":12,\"int\":\"b\"}]}"
    "]}";

static int check(NmStatus status, const char *step) {
  if (status != NmOk) {
    fprintf(stderr, "%s failed: %s\n", step, nm_last_error_message());
    return 1;
  }
  return 0;
}

int main(void) {
  NmDataset *dataset = NULL;
  NmTheory *theory = NULL;
  char *text = NULL;
  char *explanation = NULL;
  bool covered = false;
  uint64_t count = 0;
  NmAllenRelation relation;

  if (check(nm_dataset_parse(DATASET, &dataset), "parse")) return 1;
  if (check(nm_dataset_sequence_count(dataset, &count), "count")) return 1;
  printf("sequences: %llu\n", (unsigned long long)count);

  if (check(nm_learn(dataset, "pain", NmAttributes, &theory), "learn"))
    return 1;
  if (check(nm_theory_render(theory, &text), "render")) return 1;
  printf("theory:\n%s", text);

  if (check(nm_theory_covers(theory, dataset, "p1", NmAttributes, &covered),
            "covers"))
    return 1;
  printf("covers p1: %s\n", covered ? "yes" : "no");

  if (check(nm_allen_classify(1, 4, 2, 6, &relation), "classify")) return 1;
  printf("classify([1,4),[2,6)) = %d (NmOverlaps = %d)\n", (int)relation,
         (int)NmOverlaps);

  if (check(nm_explain(dataset, "p1", NmAttributes, NmJaccard, NmTrace, NmFar,
                       &explanation),
            "explain"))
    return 1;
  printf("far-miss explanations: %s\n", explanation);

  nm_string_free(explanation);
  nm_string_free(text);
  nm_theory_free(theory);
  nm_dataset_free(dataset);
  return 0;
}
