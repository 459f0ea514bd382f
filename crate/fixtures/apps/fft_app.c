#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include "nrlib.h"

#define FFT_LOG2N 14

/* Deterministic test signal: two tones plus a ramp. */
static void fill_signal(double *data, unsigned long nn)
{
    unsigned long i;
    for (i = 0; i < nn; i++) {
        double t = (double)i / (double)nn;
        data[2 * i] = sin(2.0 * 3.14159265358979 * 50.0 * t) + 0.5 * cos(2.0 * 3.14159265358979 * 120.0 * t);
        data[2 * i + 1] = 0.25 * t;
    }
}

static double magnitude_sum(const double *data, unsigned long nn)
{
    unsigned long i;
    double acc = 0.0;
    for (i = 0; i < nn; i++) {
        acc += sqrt(data[2 * i] * data[2 * i] + data[2 * i + 1] * data[2 * i + 1]);
    }
    return acc;
}

int main(void)
{
    unsigned long nn = 1UL << FFT_LOG2N;
    int isign = 1;
    double *data = malloc(2 * nn * sizeof(double));
    if (data == NULL) {
        fprintf(stderr, "allocation failed\n");
        return 1;
    }
    fill_signal(data, nn);
    four1(data, nn, isign);
    printf("checksum=%.12e\n", magnitude_sum(data, nn));
    free(data);
    return 0;
}
