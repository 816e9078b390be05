import json

import pytest

from rcpipe.dataset import Passage, QaExample, example_to_dict
from rcpipe.factuality import CachedNliBackend, NliLabel, NliVerdict

# The seven appendix generation examples with their published per-example
# entailment labels (factuality vs. passage, correctness vs. gold answer).
APPENDIX_EXAMPLES = [
    {
        "query_id": "q1",
        "question": "when did sir arthur conan doyle die",
        "passage": "Sir Arthur Conan Doyle (May 22nd, 1859 to July 7th, 1930) was 71 "
                   "when he died of a heart attack",
        "gold": "Sir Arthur Conan Doyle died on July 7, 1930",
        "generated": "Sir Arthur Conan Doyle died on July 7, 1930",
        "np": "entail", "na": "entail",
    },
    {
        "query_id": "q2",
        "question": "where neon found in nature",
        "passage": "In nature, the chemical element neon is found in its gaseous state "
                   "only. It is found in the Earth's atmosphere in trace amounts.",
        "gold": "In nature, neon is found in the Earth's atmosphere",
        "generated": "In nature, neon is found in its gaseous state only",
        "np": "entail", "na": "neutral",
    },
    {
        "query_id": "q3",
        "question": "what is soya foods",
        "passage": "Soy is a great protein source, especially for vegetarians who do not "
                   "eat meat. Soy can be found in plant-based foods including soybeans "
                   "and products made from soybeans like soymilk and tofu",
        "gold": "The soya foods are a great protein source, especially for vegetarians "
                "who do not eat meat.",
        "generated": "Soybeans and products made from soybeans like soymilk and tofu are "
                     "soya foods",
        "np": "entail", "na": "neutral",
    },
    {
        "query_id": "q4",
        "question": "what airlines fly to flagstaff flg",
        "passage": "Flagstaff is currently serviced daily by one commercial airline: "
                   "US Airway Express flying into Flagstaff from exclusively Phoenix.",
        "gold": "US Airway Express is an airline that flies to Flagstaff",
        "generated": "US Airway Express flies to Flagstaff, Florida",
        "np": "contradict", "na": "contradict",
    },
    {
        "query_id": "q5",
        "question": "cost of parking at bna airport",
        "passage": "In 1990, Executive Travel & Parking opened its doors as Nashville "
                   "International Airport's first valet airport parking service. Our "
                   "daily parking rate of $10.50 per day is considerably less than "
                   "onsite airport valet parking ($24.00).",
        "gold": "The cost of parking at BNA airport is $10.50 per day",
        "generated": "The cost of parking at Baltimore-Washington International Airport "
                     "is $10.50 per day.",
        "np": "contradict", "na": "contradict",
    },
    {
        "query_id": "q6",
        "question": "what converts prothrombin to thrombin",
        "passage": "Thrombin is produced by the enzymatic cleavage of two sites on "
                   "prothrombin by activated Factor X (Xa). The activity of factor Xa "
                   "is greatly enhanced by binding to activated Factor V (Va), termed "
                   "the prothrombinase complex.",
        "gold": "Activated Factor X converts prothrombin to thrombin.",
        "generated": "The prothrombinase complex converts prothrombin to thrombin.",
        "np": "neutral", "na": "contradict",
    },
    {
        "query_id": "q7",
        "question": "salad from mcdonalds calories",
        "passage": "A super-size portion of fries at McDonald's contains 486 calories. "
                   "A spokeswoman added: Free of dressing a chicken salad has only 222 "
                   "calories.",
        "gold": "At McDonald's, there are 222 calories of a chicken salad which is free "
                "of dressing",
        "generated": "There are 206 calories in a salad from McDonald's.",
        "np": "contradict", "na": "contradict",
    },
]


def make_example(query_id: str, question: str, passages: list[str], answers: list[str],
                 well_formed: list[str] | None = None, answerable: bool = True,
                 selected: int | None = 0) -> QaExample:
    return QaExample(
        query_id=query_id,
        query=question,
        passages=tuple(
            Passage(index=i, text=t, is_selected=(i == selected))
            for i, t in enumerate(passages)
        ),
        answers=tuple(answers),
        well_formed_answers=tuple(well_formed or []),
        answerable=answerable,
    )


@pytest.fixture
def appendix_fixture(tmp_path):
    """Gold JSONL, prediction JSONL, and a pre-seeded NLI verdict cache for
    the seven appendix examples."""
    gold_path = tmp_path / "gold.jsonl"
    pred_path = tmp_path / "predictions.jsonl"
    cache_path = tmp_path / "nli_cache.jsonl"

    with gold_path.open("w", encoding="utf-8") as fh:
        for row in APPENDIX_EXAMPLES:
            example = make_example(row["query_id"], row["question"],
                                   [row["passage"]], [row["gold"]])
            fh.write(json.dumps(example_to_dict(example)) + "\n")
    with pred_path.open("w", encoding="utf-8") as fh:
        for row in APPENDIX_EXAMPLES:
            fh.write(json.dumps({"query_id": row["query_id"], "raw": row["generated"]}) + "\n")

    cache = CachedNliBackend(cache_path)
    for row in APPENDIX_EXAMPLES:
        np_verdict = NliVerdict(label=NliLabel(row["np"]))
        na_verdict = NliVerdict(label=NliLabel(row["na"]))
        cache.store(premise=row["passage"], hypothesis=row["generated"], verdict=np_verdict)
        cache.store(premise=row["gold"], hypothesis=row["generated"], verdict=na_verdict)
        cache.store(premise=row["generated"], hypothesis=row["gold"], verdict=na_verdict)
    return {"gold": gold_path, "predictions": pred_path, "nli_cache": cache_path}
