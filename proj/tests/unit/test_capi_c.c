#include <fewnet/fewnet.h>

#include <math.h>
#include <stdio.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                    \
    do {                                                                \
        if (!(cond)) {                                                  \
            fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                 \
        }                                                               \
    } while (0)

int main(void) {
    double values[64];
    double trend[64];
    double cycle[64];
    double out[3];
    fewnet_series* series = NULL;
    fewnet_mra* mra = NULL;
    fewnet_metrics m;
    size_t t;
    int k;
    double worst = 0.0;
    const double y[2] = {2.0, 4.0};
    const double f[2] = {1.0, 5.0};
    const double naive[2] = {3.0, 3.0};
    const double train[3] = {1.0, 2.0, 4.0};

    for (t = 0; t < 64; ++t) values[t] = cos(0.2 * (double)t) + 0.05 * (double)t;

    EXPECT(strlen(fewnet_version()) > 0);
    EXPECT(fewnet_series_create(2010, 1, values, 64, &series) == FEWNET_OK);
    EXPECT(fewnet_series_length(series) == 64);
    fewnet_series_free(series);

    EXPECT(fewnet_mra_create(values, 64, "haar", 0, &mra) == FEWNET_OK);
    EXPECT(fewnet_mra_levels(mra) == 4);
    for (t = 0; t < 64; ++t) {
        double s = fewnet_mra_smooth(mra)[t];
        for (k = 1; k <= fewnet_mra_levels(mra); ++k) s += fewnet_mra_detail(mra, k)[t];
        if (fabs(s - values[t]) > worst) worst = fabs(s - values[t]);
    }
    EXPECT(worst < 1e-10);
    fewnet_mra_free(mra);

    EXPECT(fewnet_hp_filter(values, 64, 14400.0, trend, cycle) == FEWNET_OK);
    for (t = 0; t < 64; ++t) EXPECT(fabs(trend[t] + cycle[t] - values[t]) < 1e-9);

    EXPECT(fewnet_compute_metrics(y, f, 2, train, 3, 1, naive, &m) == FEWNET_OK);
    EXPECT(fabs(m.rmse - 1.0) < 1e-12);
    EXPECT(fabs(m.theils_u1 - 0.0877058) < 1e-6);

    EXPECT(fewnet_rw_forecast(values, 64, 3, out) == FEWNET_OK);
    EXPECT(out[2] == values[63]);

    EXPECT(fewnet_rw_forecast(NULL, 64, 3, out) == FEWNET_ERR_INVALID_ARGUMENT);
    EXPECT(strlen(fewnet_last_error()) > 0);
    EXPECT(strcmp(fewnet_status_string(FEWNET_ERR_LEVEL), fewnet_status_string(FEWNET_ERR_SHAPE)) != 0);

    if (failures == 0) printf("C interface checks passed\n");
    return failures == 0 ? 0 : 1;
}
