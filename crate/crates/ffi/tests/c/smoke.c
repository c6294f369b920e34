#include <math.h>
#include <stdio.h>
#include "ballseries.h"

int main(void) {
    double re[1] = {0.5}, im[1] = {0.0};
    BsPoint *z = NULL, *o = NULL;
    double d = 0.0, zero[1] = {0.0};
    if (bs_point_new(re, im, 1, &z) != BS_STATUS_OK) return 1;
    if (bs_point_new(zero, zero, 1, &o) != BS_STATUS_OK) return 2;
    if (bs_distance(o, z, &d) != BS_STATUS_OK) return 3;
    if (fabs(d - log(3.0)) > 1e-14) return 4;
    double big[1] = {1.5};
    BsPoint *bad = NULL;
    if (bs_point_new(big, zero, 1, &bad) != BS_STATUS_OUTSIDE_BALL) return 5;
    if (bs_last_error_message()[0] == '\0') return 6;
    bs_point_free(z);
    bs_point_free(o);
    printf("ok %s\n", bs_version());
    return 0;
}
