#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "cbtr.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        CbtrStatus s_ = (call);                                            \
        if (s_ != CBTR_STATUS_OK) {                                        \
            fprintf(stderr, "%s -> %d: %s\n", #call, s_, cbtr_last_error()); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    const char *csv =
        "vid,timestamp,lat,lon,sog,cog\n"
        "1,0,37.0,-76.0,10,90\n"
        "1,10,37.0,-75.99994,10,90\n"
        "1,20,37.0,-75.99988,10,90\n";
    CbtrDataset *ds = NULL;
    CHECK(cbtr_dataset_from_csv_buffer((const uint8_t *)csv, strlen(csv), true, &ds));
    if (cbtr_dataset_len(ds) != 3) return 2;

    CbtrConfigC cfg;
    CHECK(cbtr_config_default(&cfg));
    cfg.n_abnormal = 0;
    CbtrRun *run = NULL;
    CHECK(cbtr_run(ds, &cfg, 1, &run));
    size_t ids[3];
    CHECK(cbtr_run_cluster_ids(run, ids, 3));
    int64_t next = 0;
    CHECK(cbtr_run_link_target(run, 0, &next));

    if (cbtr_run_link_target(run, 99, &next) != CBTR_STATUS_OUT_OF_RANGE) return 3;
    if (strlen(cbtr_last_error()) == 0) return 4;

    CbtrEval ev;
    CHECK(cbtr_run_evaluate(run, ds, &ev));
    printf("clusters=%zu next0=%lld rate=%.3f\n", cbtr_run_n_clusters(run), (long long)next,
           ev.correct_neighbor_rate);
    cbtr_run_free(run);
    cbtr_dataset_free(ds);
    return 0;
}
