# ## Turning a task formula into an automaton
# A co-safe formula only needs a finite witness, so a DFA over label sets
# decides it.  Here we compile a couple of formulas and walk words through them.
from tlrelax.formula import accepts, compile_formula, parse, symbol

phi = parse("F a && F (b && F c)")
dfa = compile_formula(phi)
print("states:", dfa.n_states, "accepting:", sorted(dfa.accepting))

# ## Feeding words
# Each position of a word is the set of propositions true at that step.
a, b, c, empty = symbol("a"), symbol("b"), symbol("c"), symbol()
for word in ([a, b, c], [b, c, a], [c, b, a], [empty, b, a, c]):
    print([sorted(s) for s in word], "->", accepts(dfa, word))

# ## A disjunctive errand list
# Either branch of the disjunction is enough.
city = parse("(F lunch && F (groceries || coffee) && F bakery) || (F fuel && F (breakfast && F bookstore))")
print("city task DFA states:", compile_formula(city).n_states)
