#include <math.h>
#include <stdio.h>
#include <stdlib.h>

/* Spectrum helper pasted in from an old project and tidied up. */
static void spectrum(double *buf, unsigned long count, int dir)
{
    unsigned long m, f, pos;
    /* scratch output plus the twiddle tables */
    double *res = malloc(2 * count * sizeof(double));
    double *cr = malloc(count * sizeof(double));
    double *ci = malloc(count * sizeof(double));
    double step = dir * 6.28318530717958647692 / (double)count;
    for (f = 0; f < count; f++) {
        cr[f] = cos(step * (double)f);
        ci[f] = sin(step * (double)f); /* imaginary part */
    }
    for (f = 0; f < count; f++) {
        double accr = 0.0, acci = 0.0;
        pos = 0;
        for (m = 0; m < count; m++) {
            double re = buf[2 * m], im = buf[2 * m + 1];
            accr += re * cr[pos] - im * ci[pos];
            acci += re * ci[pos] + im * cr[pos];
            /* advance the twiddle index modulo count */
            pos += f;
            if (pos >= count) pos -= count;
        }
        res[2 * f] = accr;
        res[2 * f + 1] = acci;
    }
    for (m = 0; m < 2 * count; m++) {
        buf[m] = res[m];
    }
    free(ci);
    free(cr);
    free(res);
}

int main(void)
{
    unsigned long count = 4096;
    unsigned long i;
    double total = 0.0;
    double *buf = malloc(2 * count * sizeof(double));
    if (buf == NULL) {
        return 1;
    }
    for (i = 0; i < count; i++) {
        buf[2 * i] = cos(0.01 * (double)i);
        buf[2 * i + 1] = 0.0;
    }
    spectrum(buf, count, -1);
    for (i = 0; i < count; i++) {
        total += fabs(buf[2 * i]) + fabs(buf[2 * i + 1]);
    }
    printf("checksum=%.12e\n", total);
    free(buf);
    return 0;
}
