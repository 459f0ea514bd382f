#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include "nrlib.h"

#ifndef LU_N
#define LU_N 1024
#endif

static unsigned int lcg_state = 12345u;

static double next_uniform(void)
{
    lcg_state = lcg_state * 1103515245u + 12345u;
    return (double)((lcg_state >> 8) & 0xffffu) / 65536.0;
}

/* Diagonally dominant, hence well conditioned. */
static void build_system(double *a, double *b, int n)
{
    int i, j;
    for (i = 0; i < n; i++) {
        double row = 0.0;
        for (j = 0; j < n; j++) {
            a[i * n + j] = next_uniform() - 0.5;
            row += fabs(a[i * n + j]);
        }
        a[i * n + i] = row + 1.0;
        b[i] = next_uniform();
    }
}

int main(void)
{
    int n = LU_N;
    int i;
    double d;
    double checksum = 0.0;
    double *a = malloc((size_t)n * n * sizeof(double));
    double *b = malloc((size_t)n * sizeof(double));
    int *indx = malloc((size_t)n * sizeof(int));
    if (a == NULL || b == NULL || indx == NULL) {
        fprintf(stderr, "allocation failed\n");
        return 1;
    }
    build_system(a, b, n);
    ludcmp(a, n, indx, &d);
    lubksb(a, n, indx, b);
    for (i = 0; i < n; i++) {
        checksum += fabs(b[i]);
    }
    printf("checksum=%.12e\n", checksum);
    free(indx);
    free(b);
    free(a);
    return 0;
}
