/* Winding number of the unit circle in the line {z2 = 0} against z0. */
#include <stdio.h>

#include "projlink.h"

static const char *CIRCLE =
    "{\"dimension\": 2, \"components\": [{\"multiplicity\": 1, \"fourier\": ["
    "{\"k\": 0, \"re\": [1, 0, 0], \"im\": [0, 0, 0]},"
    "{\"k\": 1, \"re\": [0, 1, 0], \"im\": [0, 0, 0]}]}]}";

int main(void) {
    PlCurve *curve = NULL;
    PlSection *z0 = NULL;
    const double re[3] = {1, 0, 0};
    const double im[3] = {0, 0, 0};
    double value = 0, error = 0;

    if (pl_curve_from_json(CIRCLE, &curve) != PL_STATUS_OK ||
        pl_section_new(2, 1, re, im, 3, &z0) != PL_STATUS_OK ||
        pl_winding_number(curve, z0, &value, &error) != PL_STATUS_OK) {
        fprintf(stderr, "projlink: %s\n", pl_last_error_message());
        return 1;
    }
    printf("projlink %s: Wind = %.12f (+- %.1e)\n", pl_version(), value, error);
    pl_section_free(z0);
    pl_curve_free(curve);
    return 0;
}
