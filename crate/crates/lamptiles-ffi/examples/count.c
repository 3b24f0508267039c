#include <stdio.h>
#include "lamptiles.h"

int main(void) {
    LampTileset *t = NULL;
    if (lamp_tileset_builtin("xtree", 0, NULL, &t) != LAMP_STATUS_OK) {
        fprintf(stderr, "%s\n", lamp_last_error());
        return 1;
    }
    for (int k = 1; k <= 4; k++) {
        uint64_t n = 0;
        if (lamp_tileset_count(t, k, 1, 0, &n) != LAMP_STATUS_OK) {
            fprintf(stderr, "%s\n", lamp_last_error());
            return 1;
        }
        printf("height=%d count=%llu\n", k, (unsigned long long)n);
    }
    lamp_tileset_free(t);
    return 0;
}
