/* Build (from the workspace root, after `cargo build --release -p pairscat-ffi`):
 *   cc crates/ffi/examples/demo.c -Icrates/ffi/include \
 *      target/release/libpairscat_ffi.a -lm -lpthread -ldl -o demo
 */
#include <stdio.h>
#include "pairscat.h"

static int check(enum PairscatStatus s) {
    if (s != PAIRSCAT_STATUS_OK) {
        fprintf(stderr, "error %d: %s\n", (int)s, pairscat_last_error_message());
        return 1;
    }
    return 0;
}

int main(void) {
    struct PairscatState a = {2, 0, 0}, b = {0, 0, 0};
    struct PairscatFinal fin = {2, 0, 0, 0};
    struct PairscatTmx *tmx = NULL;
    if (check(pairscat_tmx_synthesize(4.0, a, b, 2, 6, 1, true, &tmx))) return 1;

    double totals[3];
    enum PairscatInitialKind kinds[3] = {PAIRSCAT_INITIAL_KIND_PLUS, PAIRSCAT_INITIAL_KIND_MINUS,
                                         PAIRSCAT_INITIAL_KIND_PAIR};
    for (int i = 0; i < 3; i++) {
        struct PairscatInitial init = {kinds[i], 0.0, 0.0};
        struct PairscatAmplitudes *amps = NULL;
        if (check(pairscat_amplitudes_new(tmx, a, b, init, fin, PAIRSCAT_ROUTE_INCOMING, &amps))) return 1;
        if (check(pairscat_amplitudes_total(amps, &totals[i]))) return 1;
        pairscat_amplitudes_free(amps);
    }
    double dc;
    if (check(pairscat_control_metric(totals[0], totals[1], totals[2], &dc))) return 1;
    printf("pairscat %s: sigma+ %.6f sigma- %.6f sigma %.6f d_c %.2f%%\n", pairscat_version(), totals[0], totals[1],
           totals[2], dc);

    /* errors come back as codes with a thread-local message */
    if (pairscat_control_metric(1.0, 2.0, 0.0, &dc) != PAIRSCAT_STATUS_DOMAIN) return 1;
    printf("expected error: %s\n", pairscat_last_error_message());
    pairscat_tmx_free(tmx);
    return 0;
}
