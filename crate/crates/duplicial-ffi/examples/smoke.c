#include <assert.h>
#include <stdio.h>
#include <string.h>
#include "duplicial.h"

int main(void) {
    DupTree *vertex = NULL;
    assert(dup_tree_parse("(..)", &vertex) == DUP_STATUS_OK);
    DupTree *stacked = NULL;
    assert(dup_tree_over(vertex, vertex, &stacked) == DUP_STATUS_OK);
    char *text = NULL;
    assert(dup_tree_to_string(stacked, &text) == DUP_STATUS_OK);
    assert(strcmp(text, "((..).)") == 0);
    dup_string_free(text);

    DupTree *bad = NULL;
    assert(dup_tree_parse("((", &bad) == DUP_STATUS_PARSE);
    assert(strlen(dup_last_error_message()) > 0);

    DupTree *comb = NULL;
    assert(dup_tree_parse("(.(..))", &comb) == DUP_STATUS_OK);
    DupSeries *e = NULL;
    assert(dup_series_catalog("E", 3, &e) == DUP_STATUS_OK);
    char *coeff = NULL;
    assert(dup_series_coeff(e, stacked, &coeff) == DUP_STATUS_OK);
    assert(strcmp(coeff, "1") == 0);
    dup_string_free(coeff);
    assert(dup_series_coeff(e, comb, &coeff) == DUP_STATUS_OK);
    assert(strcmp(coeff, "-1") == 0);
    dup_string_free(coeff);
    dup_series_free(e);
    dup_tree_free(comb);

    DupLattice *lat = NULL;
    assert(dup_lattice_build(3, &lat) == DUP_STATUS_OK);
    size_t size = 0;
    assert(dup_lattice_size(lat, &size) == DUP_STATUS_OK && size == 5);
    dup_lattice_free(lat);

    bool passed = false;
    assert(dup_verify_run("trees", 3, 42, &passed, NULL) == DUP_STATUS_OK);
    assert(passed);

    dup_tree_free(stacked);
    dup_tree_free(vertex);
    puts("smoke ok");
    return 0;
}
