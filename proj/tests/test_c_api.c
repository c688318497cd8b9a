/* Exercises the shared library from C. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "jsde/jsde.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                               \
        }                                                             \
    } while (0)

int main(void) {
    jsde_model* m = NULL;
    char* text = NULL;
    int pass = -1;

    EXPECT(strlen(jsde_version()) > 0);

    EXPECT(jsde_model_from_scenario("cir-stable", &m) == JSDE_OK);
    EXPECT(jsde_check(m, 1, &text, &pass) == JSDE_OK);
    EXPECT(pass == 1);
    EXPECT(jsde_validate_report(text) == JSDE_OK);
    jsde_string_free(text);

    /* Pure big-jump path starting at 0 with a stable measure. */
    jsde_path* p = NULL;
    EXPECT(jsde_simulate(m, 1.0, 1.0, 1e-2, 1e-3, 42, &p) == JSDE_OK);
    EXPECT(jsde_path_size(p) >= 101);
    double t = -1, x = NAN;
    int kind = 0;
    EXPECT(jsde_path_point(p, 0, &t, &x, &kind) == JSDE_OK);
    EXPECT(t == 0.0 && x == 1.0 && (kind & JSDE_POINT_GRID));
    EXPECT(jsde_path_point(p, jsde_path_size(p), &t, &x, &kind) == JSDE_INVALID_ARGUMENT);
    EXPECT(jsde_path_blew_up(p, &t) == 0);
    EXPECT(jsde_path_csv(p, &text) == JSDE_OK);
    EXPECT(strncmp(text, "time,x,is_jump,jump_kind\n", 25) == 0);
    jsde_string_free(text);
    jsde_path_free(p);

    /* Same seed, same bytes. */
    char* a = NULL;
    char* b = NULL;
    jsde_path* p1 = NULL;
    jsde_path* p2 = NULL;
    EXPECT(jsde_simulate(m, 1.0, 1.0, 1e-2, 1e-3, 7, &p1) == JSDE_OK);
    EXPECT(jsde_simulate(m, 1.0, 1.0, 1e-2, 1e-3, 7, &p2) == JSDE_OK);
    EXPECT(jsde_path_csv(p1, &a) == JSDE_OK && jsde_path_csv(p2, &b) == JSDE_OK);
    EXPECT(strcmp(a, b) == 0);
    jsde_string_free(a);
    jsde_string_free(b);
    jsde_path_free(p1);
    jsde_path_free(p2);

    EXPECT(jsde_model_set_experiment(m, "{\"paths\": 10, \"psi_n\": [1]}") == JSDE_OK);
    EXPECT(jsde_couple(m, 2, 1, &text) == JSDE_OK);
    EXPECT(jsde_validate_report(text) == JSDE_OK);
    char* csv = NULL;
    EXPECT(jsde_couple_csv(text, &csv) == JSDE_OK);
    EXPECT(strncmp(csv, "time,mean_abs_gap,std_err,psi_1\n", 32) == 0);
    jsde_string_free(csv);
    jsde_string_free(text);

    EXPECT(jsde_model_set_experiment(m, "{\"step\": -1}") == JSDE_CONFIG_ERROR);
    EXPECT(strcmp(jsde_last_error_pointer(), "/experiment/step") == 0);
    jsde_model_free(m);

    /* Errors. */
    m = NULL;
    EXPECT(jsde_model_from_json("{\"levy\": {\"family\": \"stable\", \"alpha\": 0.5, \"scal\": 1}}", &m) ==
           JSDE_CONFIG_ERROR);
    EXPECT(m == NULL);
    EXPECT(strcmp(jsde_last_error_pointer(), "/levy/scal") == 0);
    EXPECT(strlen(jsde_last_error()) > 0);
    EXPECT(jsde_model_from_json("{ nope", &m) == JSDE_CONFIG_ERROR);
    EXPECT(jsde_model_from_scenario("no-such", &m) == JSDE_CONFIG_ERROR);
    EXPECT(jsde_model_from_scenario(NULL, &m) == JSDE_INVALID_ARGUMENT);
    EXPECT(jsde_validate_report("{\"kind\": \"couple\"}") == JSDE_CONFIG_ERROR);

    EXPECT(jsde_psi_table("power:0.5", 3, NULL, 0, &text) == JSDE_OK);
    EXPECT(strstr(text, "a_1=0.3678794411714") != NULL);
    jsde_string_free(text);
    const double grid[] = {0.0, 0.01, 0.1, 1.0};
    EXPECT(jsde_psi_table("linear", 2, grid, 4, &text) == JSDE_OK);
    jsde_string_free(text);
    EXPECT(jsde_psi_table("power:0.4", 3, NULL, 0, &text) != JSDE_OK);
    EXPECT(jsde_psi_table("power:0.5", 0, NULL, 0, &text) == JSDE_INVALID_ARGUMENT);

    EXPECT(jsde_scenario_names(&text) == JSDE_OK);
    EXPECT(strstr(text, "bass-alpha-big") != NULL);
    jsde_string_free(text);

    EXPECT(strcmp(jsde_status_name(JSDE_DIVERGENCE), "divergence") == 0);

    if (failures) fprintf(stderr, "%d failure(s)\n", failures);
    else printf("c api: all checks passed\n");
    return failures ? 1 : 0;
}
