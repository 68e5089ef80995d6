#include <stdio.h>
#include <string.h>

#include "fading_sched.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        FsStatus s_ = (call);                                              \
        if (s_ != FS_STATUS_OK) {                                          \
            fprintf(stderr, "%s failed (%d): %s\n", #call, (int)s_,        \
                    fs_last_error_message());                              \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    FsDistribution *d = NULL;
    FsChannel *c = NULL;
    double mean = 0.0;
    unsigned char x[16];
    FsScheduleOutcome sched;
    FsSolveOutcome best;
    char *count = NULL;

    CHECK(fs_distribution_parse("pareto:alpha=3", &d));
    CHECK(fs_distribution_mean(d, &mean));
    CHECK(fs_channel_generate(12, d, 7, &c));
    CHECK(fs_schedule(c, d, 1.0, 0.1, FS_SCHEDULE_MODE_ADAPTIVE, 0.1, 0.05, 0, x, &sched));
    CHECK(fs_solve(c, 1.0, 0.1, FS_SOLVER_EXHAUSTIVE, 0, 24, NULL, &best));
    CHECK(fs_search_space_size(20, 5, &count));

    if (fs_distribution_parse("pareto:alpha=1.5", &d) != FS_STATUS_DOMAIN) {
        fprintf(stderr, "expected a domain error\n");
        return 1;
    }
    printf("mean=%.3f adaptive=%zu optimal=%zu explored=%llu count=%s\n", mean,
           sched.t_realized, best.best_t, (unsigned long long)best.explored, count);

    fs_string_free(count);
    fs_channel_free(c);
    fs_distribution_free(d);
    return 0;
}
