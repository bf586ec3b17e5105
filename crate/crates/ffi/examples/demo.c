/* Builds a tiny graph, scores BLEU and prints the results.
 *
 *   cc demo.c -I../include ../../../target/debug/libgraph_distill_ffi.a -lpthread -ldl -lm -o demo
 */
#include <stdio.h>

#include "graph_distill.h"

static int check(GdStatus s, const char *what) {
    if (s != GD_STATUS_OK) {
        const char *msg = gd_last_error_message();
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, msg ? msg : "?");
        return 1;
    }
    return 0;
}

int main(void) {
    GdGraph *g = gd_graph_new();
    if (check(gd_graph_add_language(g, "en", 100), "add en")) return 1;
    if (check(gd_graph_add_language(g, "fr", 100), "add fr")) return 1;
    if (check(gd_graph_add_edge(g, "en", "fr", 7), "edge en->fr")) return 1;
    if (check(gd_graph_add_edge(g, "fr", "en", 5), "edge fr->en")) return 1;

    uint64_t volume = 0;
    if (check(gd_graph_bilingual_volume(g, "en", &volume), "volume")) return 1;
    printf("edges=%zu volume(en)=%llu\n", gd_graph_edge_count(g), (unsigned long long)volume);

    /* errors come back as codes with a message */
    GdStatus s = gd_graph_add_edge(g, "en", "xx", 1);
    printf("unknown language -> %d: %s\n", (int)s, gd_last_error_message());
    gd_graph_free(g);

    const char *hyps[] = {"a b c d e"};
    const char *refs[] = {"a b c d e f"};
    double score = 0.0;
    if (check(gd_bleu(hyps, refs, 1, &score), "bleu")) return 1;
    printf("bleu=%.3f\n", score);
    return 0;
}
