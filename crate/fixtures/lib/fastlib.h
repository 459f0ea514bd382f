#ifndef FASTLIB_H
#define FASTLIB_H

/* Stand-in accelerator library: same contracts as the naive routines. */
void fastlib_fft(double *data, unsigned long nn, int isign);
void fastlib_ludcmp(double *a, int n, int *indx, double *d);

#endif
