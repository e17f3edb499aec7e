#include <math.h>
#include <stdio.h>
#include "majorana.h"

int main(void) {
    MajState *s = NULL;
    MajConstellation *c = NULL;
    if (maj_state_coherent(4, 0.3, -0.2, &s) != MAJ_STATUS_OK) return 1;
    if (maj_state_to_constellation(s, &c) != MAJ_STATUS_OK) return 2;
    size_t finite = 0, inf = 0;
    maj_constellation_counts(c, &finite, &inf);
    if (finite != 4 || inf != 0) return 3;
    double a1 = 0.0;
    maj_quantumness(s, 1, &a1);
    /* coherent S = 2: A_1 = 3S / ((S + 1)(2S + 1)) */
    if (fabs(a1 - 0.4) > 1e-12) return 4;
    char msg[128];
    if (maj_state_new(4, NULL, 0, &s) == MAJ_STATUS_OK) return 5;
    maj_last_error_message(msg, sizeof msg, NULL);
    printf("%s\n", msg);
    maj_constellation_free(c);
    maj_state_free(s);
    return 0;
}
