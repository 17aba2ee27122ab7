"""Scripted completion endpoints for offline agent tests."""

from tutorenv.graph import enumerate_reachable


class ScriptedTutorEndpoint:
    """Echoes the correct demo for any state it is shown, with optional noise.

    Looks the current state up in a precomputed state -> demo table built
    from the problem pool, like a perfectly knowledgeable mock tutor model;
    every nth call answers gibberish to exercise the unparseable path.
    """

    def __init__(self, problems, gibberish_every=0):
        self.demos = {}
        for _, graph in problems:
            for cursor in enumerate_reachable(graph):
                if not cursor.is_done():
                    self.demos[cursor.state.to_json()] = cursor.get_demo()
        self.calls = 0
        self.gibberish_every = gibberish_every

    def __call__(self, prompt: str) -> str:
        self.calls += 1
        if self.gibberish_every and self.calls % self.gibberish_every == 0:
            return "I am not sure what to do."
        state_text = prompt.split("## Current state\n", 1)[1].split("\n", 1)[0]
        demo = self.demos.get(state_text)
        if demo is None:
            return "I am not sure what to do."
        return f"The next step is {demo.to_json()}."
