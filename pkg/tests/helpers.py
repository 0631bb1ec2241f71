"""Training loops shared by several test modules."""


def sweep_train(agent, env, rng, sweeps):
    """Exhaustive exploration: every available (s, a) once per sweep, in random order."""
    pairs = [(s, a) for s in range(env.num_states) if s not in env.terminals
             for a in env.valid_actions(s)]
    for _ in range(sweeps):
        for i in rng.permutation(len(pairs)):
            s, a = pairs[i]
            s2, r, done = env.step(s, int(a), rng)
            agent.update(s, int(a), r, s2, done)
