#include <stdio.h>
#include <math.h>

struct running_stats {
    long count;
    double mean;
    double m2;
};

static void stats_push(struct running_stats *s, double x)
{
    double delta = x - s->mean;
    s->count++;
    s->mean += delta / (double)s->count;
    s->m2 += delta * (x - s->mean);
}

int main(void)
{
    struct running_stats s = {0, 0.0, 0.0};
    int i;
    for (i = 0; i < 1000; i++) {
        stats_push(&s, sin(0.1 * i) + 0.5 * cos(0.03 * i));
    }
    printf("checksum=%.12e\n", s.mean + sqrt(s.m2 / (double)(s.count - 1)));
    return 0;
}
