#include <stdio.h>
#include <stdlib.h>

static void swap_items(int *v, int i, int j)
{
    int t = v[i];
    v[i] = v[j];
    v[j] = t;
}

/* Lomuto partition quicksort over v[lo..hi]. */
static void quicksort(int *v, int lo, int hi)
{
    int i, p, pivot;
    if (lo >= hi) {
        return;
    }
    pivot = v[hi];
    p = lo;
    for (i = lo; i < hi; i++) {
        if (v[i] < pivot) {
            swap_items(v, i, p);
            p++;
        }
    }
    swap_items(v, p, hi);
    quicksort(v, lo, p - 1);
    quicksort(v, p + 1, hi);
}

int main(void)
{
    int n = 10000;
    int i;
    long sum = 0;
    unsigned int seed = 7u;
    int *v = malloc((size_t)n * sizeof(int));
    if (v == NULL) {
        return 1;
    }
    for (i = 0; i < n; i++) {
        seed = seed * 1664525u + 1013904223u;
        v[i] = (int)(seed >> 16);
    }
    quicksort(v, 0, n - 1);
    for (i = 1; i < n; i++) {
        if (v[i - 1] > v[i]) {
            printf("unsorted at %d\n", i);
            free(v);
            return 1;
        }
        sum += v[i] % 1000;
    }
    printf("checksum=%ld\n", sum);
    free(v);
    return 0;
}
