"""Packaged demo session: a replayed mining run over three integration examples.

The replay fixture pins every assistant response, so the demo is fully
deterministic: run the eight steps, apply the curation pass (one drop, four
renames, curated field texts), generate the three pattern stories, and
summarize the process.
"""

from __future__ import annotations

from importlib import resources

from .curation import drop_pattern, edit_field, rename_pattern
from .engine import MiningEngine, Session
from .gateway import ReplayClient, ReplayFixture
from .ingest import parse_example_text
from .model import Clock, KnownUse, Origin, StepId, utc_now

SAMPLE_SESSION_ID = "llm-integration-demo"
_FIXTURE_NAME = "llm-integration.replay.txt"
_EXAMPLE_FILES = (
    "customer-support.md",
    "research-assistant.md",
    "startup-failure-analysis.md",
)

_RUN_STEPS = (
    StepId.EXTRACT_SOLUTIONS,
    StepId.DEFINE_PROBLEMS,
    StepId.DISTILL_PATTERNS,
    StepId.IDENTIFY_AFFORDANCES,
    StepId.RELATE_AFFORDANCES,
    StepId.REFINE,
)

_DROPPED = "Iterative Refinement and Feedback"
_DROP_REASON = (
    "refinement loops recur in the transcripts but describe how the other "
    "patterns are applied, not a distinct integration solution"
)

_RENAMES = (
    ("Data Retrieval and Preprocessing", "Data Preprocessing", "retrieval is incidental; the pattern is about preparing data"),
    ("Integration with External Tools", "Tool Integration", "shorter name, same scope"),
    ("Adaptive Response Generation", "Adaptive Response", "generation is implied; the adaptation is the point"),
    ("Custom Application Logic", "Custom Logic", "shorter name, same scope"),
)

# Curated field texts, applied after the drop and the renames. Keyed by the
# pattern's final name; resulting_context citations use [[...]] markers and
# known_uses references carry [[ku:<id>]] pins.
_CURATED_FIELDS: dict[str, dict[str, str]] = {
    "Data Preprocessing": {
        "context": "Data sources provide data in a variety of formats.",
        "problem": "Raw data is often unstructured, noisy, and not in a directly usable format.",
        "forces": (
            "The diversity of data sources and formats, the presence of irrelevant or redundant "
            "information, and the need for data to be in a specific structure for analysis or "
            "processing make this problem challenging."
        ),
        "solution_statement": (
            "Implement preprocessing steps to clean, normalize, and structure raw data into a usable format."
        ),
        "solution_detail": (
            "[[Data preprocessing and enhancement]], including scraping, cleaning, and formatting raw data, "
            "is crucial to making the data usable for analysis by LLMs or storage in databases. The "
            "[[content generation]] capabilities of an LLM can also be used to preprocess text and normalize "
            "or summarize information before it is indexed in a database or further analyzed in an LLM."
        ),
        "known_uses": (
            "In the customer support example, FAQs are parsed and structured for indexing. "
            "[[ku:customer-support]] In the research assistant scenario, research abstracts are retrieved "
            "and preprocessed for topic modeling. [[ku:research-assistant]]"
        ),
        "resulting_context": (
            "After data is retrieved and preprocessed, consider applying [[Data Structuring and Enhancement]] "
            "to organize and enhance the data to make it more suitable for analysis or querying. This is "
            "critical because structured, enhanced data can be more effectively indexed, searched, and "
            "analyzed, especially when dealing with complex queries or the need for semantic understanding."
        ),
    },
    "Data Structuring and Enhancement": {
        "context": "Raw or preprocessed data lacks organization, categorization, or semantic richness.",
        "problem": (
            "Data is unstructured and lacks semantic organization, making it difficult to analyze or "
            "query effectively."
        ),
        "forces": (
            "The inherent complexity of natural language, the variety of possible interpretations, and the "
            "need for semantic understanding to perform specific tasks contribute to the challenge."
        ),
        "solution_statement": (
            "Structure and enhance data using techniques like semantic indexing, embedding, or "
            "categorization to add meaningful organization and context."
        ),
        "solution_detail": (
            "To organize preprocessed data in an accessible manner, it is essential to structure the data "
            "([[structured data storage]]), for example, as a list or in JSON format. "
            "[[Semantic indexing and retrieval]] can be used to enhance the retrieval process, making it "
            "more relevant and efficient. LLMs can help structure data by identifying semantic relationships "
            "or categorizations, which can, in turn, inform database indexing ([[semantic search and "
            "matching]]). The [[specialized analytical capabilities]] of tools such as topic modeling "
            "algorithms can also be used to structure and categorize text based on its content."
        ),
        "known_uses": (
            "The vector database indexing of FAQs in the customer support example and the categorization of "
            "research abstracts into topics in the research assistant example demonstrate this solution. "
            "[[ku:customer-support]] [[ku:research-assistant]]"
        ),
        "resulting_context": (
            "Once data is structured and enhanced, [[Semantic Understanding and Synthesis]] often follow, "
            "where LLMs can use the organized data to generate insights, summaries, or responses."
        ),
    },
    "Tool Integration": {
        "context": "LLM capabilities need to be augmented with specialized functions for analysis or processing.",
        "problem": "Despite their versatility, LLMs cannot handle all specialized tasks required by specific applications.",
        "forces": (
            "The specialized nature of certain tasks, the limitations of LLMs in specific analytical "
            "domains, and the need for processing efficiency and scalability make this a challenging problem."
        ),
        "solution_statement": (
            "Augment LLMs by integrating external tools that provide specialized functions or capabilities "
            "not inherent to LLMs."
        ),
        "solution_detail": (
            "LLMs can adjust their responses based on output from external tools ([[adaptive learning]]). "
            "The tools provide [[specialized analytical capabilities]] that LLMs do not inherently have."
        ),
        "known_uses": (
            "The use of a topic modeling tool in the research assistant scenario and a clustering algorithm "
            "in the startup failure analysis example illustrate this integration. [[ku:research-assistant]] "
            "[[ku:startup-failure-analysis]]"
        ),
        "resulting_context": (
            "The output of the tool may not be directly suitable for analysis, requiring [[Data Processing]] "
            "to transform the output into a suitable format that can be consumed by further processing steps."
        ),
    },
    "Semantic Understanding and Synthesis": {
        "context": (
            "An application requires deep understanding of context and generation of coherent, contextually "
            "appropriate content."
        ),
        "problem": (
            "Simple models fail to capture the nuances of language and context, leading to superficial or "
            "irrelevant responses."
        ),
        "forces": (
            "The complexity of natural language, the subtlety of context, and the need for nuanced "
            "understanding and synthesis in responses add to the challenge."
        ),
        "solution_statement": (
            "Harness LLMs for their deep semantic understanding and synthesis capabilities to generate "
            "coherent and contextually relevant content."
        ),
        "solution_detail": (
            "[[Natural language understanding]] and content generation are at the heart of this pattern, "
            "enabling LLMs to understand context and generate coherent, contextually relevant content."
        ),
        "known_uses": (
            "The generation of topic labels and summaries in the research assistant example and the "
            "synthesis of cluster descriptions in the analysis of startup failures demonstrate this "
            "capability. [[ku:research-assistant]] [[ku:startup-failure-analysis]]"
        ),
        "resulting_context": (
            "Following semantic understanding and synthesis, consider [[Adaptive Response]] to ensure that "
            "the system can handle edge cases or queries outside its training range. This is important to "
            "maintain user engagement and trust by providing relevant responses even when definitive answers "
            "are not available."
        ),
    },
    "Adaptive Response": {
        "context": "LLMs may encounter user queries that fall outside their training or the scope of available data.",
        "problem": (
            "Inevitable encounters with edge cases or limitations in data or LLM capabilities can lead to "
            "inadequate responses."
        ),
        "forces": (
            "The unpredictability of user queries, the inherent limitations of LLMs, and the finite scope of "
            "available data all contribute to this challenge."
        ),
        "solution_statement": (
            "Design LLMs to generate adaptive responses, either by acknowledging limitations or by providing "
            "the best possible alternative response."
        ),
        "solution_detail": (
            "[[Natural language understanding]] enables an LLM to recognize when a user query falls outside "
            "its training or the scope of the data provided to it as part of the context. LLMs can craft "
            "responses that acknowledge limitations or provide the best possible alternative response "
            "([[content generation]])."
        ),
        "known_uses": (
            "The customer support example, where the LLM generates a response when no suitable FAQ answer is "
            "found, demonstrates adaptive response generation. [[ku:customer-support]]"
        ),
        "resulting_context": (
            "After adaptive response generation, revisit [[Semantic Understanding and Synthesis]] to further "
            "refine the system's understanding and output based on user interactions and feedback. This "
            "could be achieved, for example, by fine-tuning the LLM or adding in-context examples. This "
            "cycle improves the system's ability to generate even more contextually appropriate and helpful "
            "responses over time."
        ),
    },
    "Custom Logic": {
        "context": "Applications of LLMs cover a wide range of domains, user needs, and data sources.",
        "problem": (
            "A one-size-fits-all approach does not adequately address the specific requirements of "
            "different applications."
        ),
        "forces": (
            "The diversity of application domains, the specificity of user needs, and the variability of "
            "data sources contribute to the application's complexity."
        ),
        "solution_statement": (
            "Develop custom logic that defines the specific integration and interaction of LLMs, data, and "
            "tools tailored to the goals of the application."
        ),
        "solution_detail": (
            "LLMs can be prompted to generate application-specific outputs required by the application "
            "([[content generation]]). Data sources can be structured according to the custom logic of the "
            "application ([[data organization and categorization]]). Finally, [[interoperability and "
            "integration]] (for example, through APIs) are essential to enable the integration of multiple "
            "external tools and systems."
        ),
        "known_uses": (
            "The specific sequences of data retrieval, processing, and LLM interaction in each example "
            "illustrate how custom application logic is tailored to meet different objectives. "
            "[[ku:customer-support]] [[ku:research-assistant]] [[ku:startup-failure-analysis]]"
        ),
        "resulting_context": (
            "After the custom application logic is created, revisit [[Tool Integration]] to ensure that all "
            "the necessary tools are effectively integrated into the workflow. Specifically, focus on the "
            "following aspects: data transformation (ensuring that each tool receives information in the "
            "required format), task alignment (matching the most appropriate tool to each task), and task "
            "granularity (the idea that each tool should perform a specific task or a small set of related "
            "tasks to improve maintainability)."
        ),
    },
}

_EDIT_ORDER = ("context", "problem", "forces", "solution_statement", "solution_detail", "known_uses", "resulting_context")


def _read_data(relative: str) -> str:
    return resources.files("patternbench").joinpath(relative).read_text(encoding="utf-8")


def load_sample_fixture() -> ReplayFixture:
    return ReplayFixture.from_text(_read_data(f"data/samples/{_FIXTURE_NAME}"))


def load_sample_examples() -> tuple[KnownUse, ...]:
    return tuple(
        parse_example_text(_read_data(f"data/samples/examples/{name}")) for name in _EXAMPLE_FILES
    )


def make_sample_engine(clock: Clock = utc_now) -> MiningEngine:
    client = ReplayClient(load_sample_fixture(), clock=clock)
    return MiningEngine(client, clock=clock)


def run_sample_pipeline(engine: MiningEngine, session_id: str = SAMPLE_SESSION_ID) -> Session:
    """Ingest the packaged examples and run all eight steps against the fixture.

    Steps 1 through 7 are approved along the way; consolidate is left awaiting
    review so the curation pass can act on it.
    """
    session = engine.new_session(session_id)
    session = engine.ingest_examples(session, load_sample_examples())
    session = engine.approve_step(session, StepId.IDENTIFY_EXAMPLES)
    for step in _RUN_STEPS:
        session = engine.run_step(session, step)
        session = engine.approve_step(session, step)
    return engine.run_step(session, StepId.CONSOLIDATE)


def apply_sample_curation(engine: MiningEngine, session: Session) -> Session:
    """The human pass: drop, rename, rewrite fields, then tell the stories."""
    session = drop_pattern(session, _DROPPED, reason=_DROP_REASON)
    for old, new, reason in _RENAMES:
        session = rename_pattern(session, old, new, reason=reason)
    for pattern_name, fields in _CURATED_FIELDS.items():
        for field_name in _EDIT_ORDER:
            session = edit_field(session, pattern_name, field_name, fields[field_name], Origin.HUMAN)
    for known_use in session.known_uses:
        session = engine.generate_story(session, known_use.id)
    session, _ = engine.summarize_process(session)
    return engine.approve_step(session, StepId.CONSOLIDATE)


def build_demo_session(session_id: str = SAMPLE_SESSION_ID, clock: Clock = utc_now) -> Session:
    """Run the whole demo: replayed pipeline plus the curation pass."""
    engine = make_sample_engine(clock)
    session = run_sample_pipeline(engine, session_id)
    return apply_sample_curation(engine, session)
