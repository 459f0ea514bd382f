#include <math.h>
#include <stdlib.h>
#include "fastlib.h"

/* Iterative radix-2 FFT; nn must be a power of two. */
void fastlib_fft(double *data, unsigned long nn, int isign)
{
    unsigned long i, j, m, len, half, k;
    double *wr, *wi;
    double theta = isign * 6.28318530717958647692 / (double)nn;

    j = 0;
    for (i = 0; i < nn; i++) {
        if (j > i) {
            double tr = data[2 * j], ti = data[2 * j + 1];
            data[2 * j] = data[2 * i];
            data[2 * j + 1] = data[2 * i + 1];
            data[2 * i] = tr;
            data[2 * i + 1] = ti;
        }
        m = nn >> 1;
        while (m >= 1 && (j & m)) {
            j ^= m;
            m >>= 1;
        }
        j |= m;
    }

    wr = malloc((nn / 2 + 1) * sizeof(double));
    wi = malloc((nn / 2 + 1) * sizeof(double));
    for (k = 0; k < nn / 2; k++) {
        wr[k] = cos(theta * (double)k);
        wi[k] = sin(theta * (double)k);
    }
    for (len = 2; len <= nn; len <<= 1) {
        unsigned long stride = nn / len;
        half = len >> 1;
        for (i = 0; i < nn; i += len) {
            for (k = 0; k < half; k++) {
                double cr = wr[k * stride], ci = wi[k * stride];
                unsigned long p = 2 * (i + k), q = 2 * (i + k + half);
                double tr = cr * data[q] - ci * data[q + 1];
                double ti = cr * data[q + 1] + ci * data[q];
                data[q] = data[p] - tr;
                data[q + 1] = data[p + 1] - ti;
                data[p] += tr;
                data[p + 1] += ti;
            }
        }
    }
    free(wi);
    free(wr);
}

#define LU_BLOCK 64

/*
 * Right-looking blocked LU with partial pivoting. Produces the same storage
 * convention as the naive routine: unit-lower L and U in place, indx[j] is
 * the row swapped with row j at step j.
 */
void fastlib_ludcmp(double *a, int n, int *indx, double *d)
{
    int kb, k, i, j, p;
    *d = 1.0;
    for (kb = 0; kb < n; kb += LU_BLOCK) {
        int kend = kb + LU_BLOCK < n ? kb + LU_BLOCK : n;
        /* panel factorization on columns kb..kend, full rows swapped */
        for (k = kb; k < kend; k++) {
            double big = fabs(a[k * n + k]);
            p = k;
            for (i = k + 1; i < n; i++) {
                double v = fabs(a[i * n + k]);
                if (v > big) {
                    big = v;
                    p = i;
                }
            }
            indx[k] = p;
            if (p != k) {
                double *rk = a + (size_t)k * n, *rp = a + (size_t)p * n;
                for (j = 0; j < n; j++) {
                    double t = rk[j];
                    rk[j] = rp[j];
                    rp[j] = t;
                }
                *d = -(*d);
            }
            if (a[k * n + k] == 0.0) a[k * n + k] = 1e-300;
            {
                double inv = 1.0 / a[k * n + k];
                const double *rk = a + (size_t)k * n;
                for (i = k + 1; i < n; i++) {
                    double *ri = a + (size_t)i * n;
                    double l = ri[k] * inv;
                    ri[k] = l;
                    for (j = k + 1; j < kend; j++) ri[j] -= l * rk[j];
                }
            }
        }
        /* U12 = L11^-1 A12 */
        for (k = kb; k < kend; k++) {
            const double *rk = a + (size_t)k * n;
            for (i = k + 1; i < kend; i++) {
                double *ri = a + (size_t)i * n;
                double l = ri[k];
                for (j = kend; j < n; j++) ri[j] -= l * rk[j];
            }
        }
        /* A22 -= L21 U12, four rank-1 updates fused per sweep */
        for (i = kend; i < n; i++) {
            double *ri = a + (size_t)i * n;
            for (k = kb; k + 3 < kend; k += 4) {
                const double l0 = ri[k], l1 = ri[k + 1], l2 = ri[k + 2], l3 = ri[k + 3];
                const double *r0 = a + (size_t)k * n;
                const double *r1 = r0 + n, *r2 = r1 + n, *r3 = r2 + n;
                for (j = kend; j < n; j++) {
                    ri[j] -= l0 * r0[j] + l1 * r1[j] + l2 * r2[j] + l3 * r3[j];
                }
            }
            for (; k < kend; k++) {
                double l = ri[k];
                const double *rk = a + (size_t)k * n;
                for (j = kend; j < n; j++) ri[j] -= l * rk[j];
            }
        }
    }
}
