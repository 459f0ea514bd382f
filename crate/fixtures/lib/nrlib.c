#include <math.h>
#include <stdlib.h>
#include "nrlib.h"

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

/*
 * Crout LU decomposition with scaled partial pivoting on a row-major n x n
 * matrix. On exit a holds L (unit diagonal, below) and U; indx records the
 * row swapped into each position and *d the permutation parity.
 */
void ludcmp(double *a, int n, int *indx, double *d)
{
    int i, imax = 0, j, k;
    double big, dum, sum, temp;
    double *vv = malloc(n * sizeof(double));
    *d = 1.0;
    for (i = 0; i < n; i++) {
        big = 0.0;
        for (j = 0; j < n; j++) {
            if ((temp = fabs(a[i * n + j])) > big) big = temp;
        }
        if (big == 0.0) big = 1e-300;
        vv[i] = 1.0 / big;
    }
    for (j = 0; j < n; j++) {
        for (i = 0; i < j; i++) {
            sum = a[i * n + j];
            for (k = 0; k < i; k++) sum -= a[i * n + k] * a[k * n + j];
            a[i * n + j] = sum;
        }
        big = 0.0;
        for (i = j; i < n; i++) {
            sum = a[i * n + j];
            for (k = 0; k < j; k++) sum -= a[i * n + k] * a[k * n + j];
            a[i * n + j] = sum;
            if ((dum = vv[i] * fabs(sum)) >= big) {
                big = dum;
                imax = i;
            }
        }
        if (j != imax) {
            for (k = 0; k < n; k++) {
                dum = a[imax * n + k];
                a[imax * n + k] = a[j * n + k];
                a[j * n + k] = dum;
            }
            *d = -(*d);
            vv[imax] = vv[j];
        }
        indx[j] = imax;
        if (a[j * n + j] == 0.0) a[j * n + j] = 1e-300;
        if (j != n - 1) {
            dum = 1.0 / a[j * n + j];
            for (i = j + 1; i < n; i++) a[i * n + j] *= dum;
        }
    }
    free(vv);
}

/* Solves A x = b given the factorization from ludcmp; b is overwritten by x. */
void lubksb(const double *a, int n, const int *indx, double *b)
{
    int i, ii = -1, ip, j;
    double sum;
    for (i = 0; i < n; i++) {
        ip = indx[i];
        sum = b[ip];
        b[ip] = b[i];
        if (ii >= 0) {
            for (j = ii; j < i; j++) sum -= a[i * n + j] * b[j];
        } else if (sum != 0.0) {
            ii = i;
        }
        b[i] = sum;
    }
    for (i = n - 1; i >= 0; i--) {
        sum = b[i];
        for (j = i + 1; j < n; j++) sum -= a[i * n + j] * b[j];
        b[i] = sum / a[i * n + i];
    }
}
