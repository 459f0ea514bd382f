#include <math.h>
#include <stdlib.h>

/*
 * Discrete Fourier transform of nn complex samples stored as interleaved
 * (re, im) pairs. Direct O(nn^2) summation, in place, unnormalized.
 */
void four1(double *data, unsigned long nn, int isign)
{
    unsigned long j, k, idx;
    double *out = malloc(2 * nn * sizeof(double));
    double *wr = malloc(nn * sizeof(double));
    double *wi = malloc(nn * sizeof(double));
    double theta = isign * 6.28318530717958647692 / (double)nn;
    for (k = 0; k < nn; k++) {
        wr[k] = cos(theta * (double)k);
        wi[k] = sin(theta * (double)k);
    }
    for (k = 0; k < nn; k++) {
        double sr = 0.0, si = 0.0;
        idx = 0;
        for (j = 0; j < nn; j++) {
            double xr = data[2 * j], xi = data[2 * j + 1];
            sr += xr * wr[idx] - xi * wi[idx];
            si += xr * wi[idx] + xi * wr[idx];
            idx += k;
            if (idx >= nn) idx -= nn;
        }
        out[2 * k] = sr;
        out[2 * k + 1] = si;
    }
    for (j = 0; j < 2 * nn; j++) {
        data[j] = out[j];
    }
    free(wi);
    free(wr);
    free(out);
}
