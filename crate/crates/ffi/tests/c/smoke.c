#include <stdio.h>
#include <string.h>
#include "sparse_sieve.h"

int main(void) {
    SsvSequence *seq = NULL;
    if (ssv_sequence_power(2, 4, &seq) != SSV_STATUS_OK) return 1;
    if (ssv_sequence_len(seq) != 4) return 2;
    uint64_t v = 0;
    if (ssv_sequence_get(seq, 4, &v) != SSV_STATUS_OK || v != 16) return 3;
    if (ssv_sequence_get(seq, 9, &v) != SSV_STATUS_ERR_INDEX) return 4;
    if (strlen(ssv_last_error()) == 0) return 5;
    ssv_sequence_free(seq);

    int64_t set[] = {1, 4, 9, 16};
    SsvEnergy e;
    if (ssv_energy(set, 4, &e) != SSV_STATUS_OK || e.e_plus != 28) return 6;

    SsvPrimeTable *t = NULL;
    SsvBvReport *r = NULL;
    if (ssv_prime_table_build(10000, &t) != SSV_STATUS_OK) return 7;
    if (ssv_bv_sum(t, "1.2", 10000, 40, &r) != SSV_STATUS_OK) return 8;
    SsvBvSummary s;
    if (ssv_bv_report_summary(r, &s) != SSV_STATUS_OK || s.window_size != ssv_bv_report_len(r)) return 9;
    ssv_bv_report_free(r);
    ssv_prime_table_free(t);
    printf("ok %s\n", ssv_version());
    return 0;
}
