#ifndef NRLIB_H
#define NRLIB_H

/* Naive reference numerics used by the fixture applications. */
void four1(double *data, unsigned long nn, int isign);
void ludcmp(double *a, int n, int *indx, double *d);
void lubksb(const double *a, int n, const int *indx, double *b);

#endif
