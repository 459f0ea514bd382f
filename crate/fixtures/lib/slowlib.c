#include <math.h>
#include <stdlib.h>
#include "fastlib.h"
#include "nrlib.h"

/*
 * Adversarial stand-in: exposes the fast library's symbols but does strictly
 * more work than the naive routines, repeating them and discarding all but
 * the final pass.
 */
#define SLOW_REPEAT 2

void fastlib_fft(double *data, unsigned long nn, int isign)
{
    int r;
    unsigned long j;
    double *copy = malloc(2 * nn * sizeof(double));
    for (r = 0; r < SLOW_REPEAT; r++) {
        for (j = 0; j < 2 * nn; j++) copy[j] = data[j];
        four1(copy, nn, isign);
    }
    for (j = 0; j < 2 * nn; j++) data[j] = copy[j];
    free(copy);
}

void fastlib_ludcmp(double *a, int n, int *indx, double *d)
{
    int r;
    size_t j, total = (size_t)n * n;
    double *copy = malloc(total * sizeof(double));
    for (r = 0; r < SLOW_REPEAT; r++) {
        for (j = 0; j < total; j++) copy[j] = a[j];
        ludcmp(copy, n, indx, d);
    }
    for (j = 0; j < total; j++) a[j] = copy[j];
    free(copy);
}
