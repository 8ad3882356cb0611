// SPDX-License-Identifier: Apache-2.0

//! Published prompt texts, LaTeX escapes included, and the expected
//! rendering of every shipped template.

use atri_core::llm::{slot, Language, PromptSet, RenderMode, TemplateId};

pub fn unlatex(s: &str) -> String {
    s.replace("\\{", "{").replace("\\}", "}")
}

pub fn bind(text: &str) -> String {
    BINDINGS.iter().fold(text.to_owned(), |t, (k, v)| t.replace(&format!("{{{{{k}}}}}"), v))
}

pub const BINDINGS: [(&str, &str); 10] = [
    (slot::ARTICLE, "<ARTICLE>"),
    (slot::CONCEPT, "<CONCEPT>"),
    (slot::COURT_VIEW, "<COURT VIEW>"),
    (slot::REASONS, "[\"<R1>\",\"<R2>\"]"),
    (slot::EXEMPLAR, "<EXEMPLAR>"),
    (slot::CRIME, "<CRIME>"),
    (slot::GENERATED_REASON, "<GENERATED>"),
    (slot::GOLD_REASON, "<GOLD>"),
    (slot::INTERPRETATION, "<INTERPRETATION>"),
    (slot::FACT, "<FACT>"),
];

pub fn paragraphs(parts: &[&str]) -> String {
    parts.iter().map(|p| unlatex(p)).collect::<Vec<_>>().join("\n\n")
}

pub const ZH_FILTER: &str = r"法律语言具有模糊性，而司法程序是对立法语言的一个明晰过程。在部分案件中，法官会根据案件事实对法律条文中的模糊概念进行具体化并在裁判文书中的“法庭观点”部分给出认定理由。我们考虑法条“\{\{article\}\}”中的模糊概念“\{\{concept\}\}”。我将给你一段法庭观点，请你判断法庭观点中，是否存在具体的句子解释“\{\{concept\}\}”适用或不适用于该案件的原因。先输出你的判断理由，然后严格按照以下格式输出你的最终判断。如果法庭观点中存在解释“\{\{concept\}\}”是否适用的句子，输出“[[是]]”；否则，输出“[[否]]”。";
pub const ZH_CLASSIFY: &str = r"法律语言具有模糊性，而司法程序是对立法语言的一个明晰过程，法官会根据案件事实对法律条文中的模糊概念进行具体化并在裁判文书中的“法庭观点”部分给出认定理由。我们考虑法条“\{\{article\}\}”中的模糊概念“\{\{concept\}\}”。我将给你一段裁判文书中的法庭观点，请你判断法官认为模糊概念“\{\{concept\}\}”是否适用于案件中的情况。先给出你的判断理由，然后严格按照以下格式输出你的最终判断：如果“\{\{concept\}\}”适用于案件中的情况，输出“[[是]]”；否则，输出“[[否]]”。";
pub const ZH_EXTRACT: &str = r"法律语言具有模糊性，而司法程序是对立法语言的一个明晰过程。法官会根据案件事实对法律条文中的模糊词进行具体化并在裁判文书中的“法庭观点”部分进行分析。在法条“\{\{article\}\}”中，模糊概念是“\{\{concept\}\}”。请你阅读裁判文书中的法庭观点，提取出法官对模糊概念的认定理由。理由包括对案件事实经过的分析和最后的结论。比如，如果模糊概念是“户”，你需要提取出法官认为案件中的场所满足或不满足“户”的理由是什么。";
pub const ZH_GENERATE: &str = r#"法律语言具有模糊性，而司法程序是对立法语言的一个明晰过程。法官会根据案件事实对法律条文中的模糊概念进行具体化并在裁判文书中分析模糊概念是否适用。请你阅读给出的JSON数据，对法条中的模糊概念进行解释。其中，"法条"是待分析的模糊概念所属的法条。"模糊概念"是你需要生成解释的法律概念。"参考文本"是从许多裁判文书中提取出的解释模糊概念的文本。
{
    "法条": {{article}},
    "模糊概念": {{concept}}
    "参考文本": {{reasons}}
}
以下是一个概念解释的样例，请以相同的格式规范输出。
{{Interpretation Example}}"#;
pub const ZH_JUDGE: &str = r"请你参考法庭观点中对“\{\{crime\}\}”中的模糊概念“\{\{concept\}\}”的认定理由，对下面模型生成的认定理由的一致性进行1-10的打分。1分代表模型生成的认定理由和法庭观点中理由完全不一致，10分代表模型生成的认定理由和法庭观点中理由完全一致。请你先输出打分理由，然后以下列格式输出你的分数：[[n]]，其中n为你的分数。";
pub const ZH_ENTAIL: &str = r"法律语言具有模糊性，而司法程序是对立法语言的一个明晰过程。法官会根据案件事实对法律条文中的模糊概念进行具体化并在裁判文书中的“法庭观点”部分分析模糊概念是否适用。在法条“\{\{article\}\}”中，模糊概念是“\{\{concept\}\}”。请你阅读下面对模糊概念的解释，根据裁判文书中的事实描述，判断案件中的情况是否适用于模糊概念“\{\{concept\}\}”。先提供判定理由，然后严格按照以下格式输出你的最终判断：如果符合模糊概念“\{\{concept\}\}”的定义，输出“[[是]]”，否则输出“[[否]]”。";

pub const EN_FILTER: &str = r#"Legal language is inherently vague, and the judicial process serves as a clarification of legislative language. In some cases, judges may concretize vague terms in the legal texts based on the facts of the case and provide reasons for their determination in the "court view" section of the ruling document. We consider the vague concept "\{\{concept\}\}" in the legal article "\{\{article\}\}". I will give you a segment of the court view; please determine whether there is a specific sentence in the court view that explains the reason why "\{\{concept\}\}" does or does not apply to the case. First, output your reasoning for the judgment, then strictly follow the format below for your final conclusion. If there is a sentence explaining whether "\{\{concept\}\}" applies, output "[[Yes]]"; otherwise, output "[[No]]"."#;
pub const EN_CLASSIFY: &str = r#"Legal language is inherently vague, and the judicial process serves as a clarification of legislative language, where judges can concretize vague terms in legal texts based on the facts of the case and provide reasons for their determination in the "court view" section of the ruling document. We consider the vague concept "\{\{concept\}\}" in the legal article "\{\{article\}\}". I will give you a segment of the court view; please determine whether the judge believes the vague concept "\{\{concept\}\}" applies to the situation in the case. First, provide your reasoning for the judgment, then strictly follow the format below for your final conclusion: If "\{\{concept\}\}" applies to the situation in the case, output "[[Yes]]"; otherwise, output "[[No]]"."#;
pub const EN_EXTRACT: &str = r#"Legal language is inherently vague, and the judicial process serves as a clarification of legislative language. Judges can concretize vague terms in legal texts based on the facts of the case and analyze them in the "court view" section of the ruling document. In the legal article "\{\{article\}\}", the vague concept is "\{\{concept\}\}". Please read the court view in the ruling document and extract the judge's reasoning for the determination of the vague concept. The reasoning includes the analysis of the facts of the case and the final conclusion. For example, if the vague concept is "dwelling," you need to extract the reasons why the judge believes the place in the case satisfies or does not satisfy the "dwelling" criterion."#;
pub const EN_GENERATE: &str = r#"Legal language is inherently vague, and the judicial process serves as a clarification of legislative language. Judges can concretize vague terms in legal texts based on the facts of the case and analyze whether the vague concept applies in the ruling document. Please read the given JSON data and interpret the vague concept in the legal article. Among them, "article" is the legal article to which the vague concept belongs. "vague concept" is the legal concept you need to interpret. "Reference text" is the text extracted from many ruling documents explaining the vague concept.
{
    "Article": {{article}},
    "vague concept": {{concept}}
    "Reference text": {{reasons}}
}
Below is an example of a concept interpretation. Please format your output following the same standard.
{{Interpretation Example}}"#;
pub const EN_JUDGE: &str = r#"Please refer to the reasons for determining the vague concept "\{\{concept\}\}" in "\{\{crime\}\}" from the court view and rate the consistency of the following model-generated reasons on a scale of 1-10. A score of 1 indicates that the model-generated reasons are completely inconsistent with the reasons in the court view, while a score of 10 indicates complete consistency. First, output your reasoning for the score, then output your score in the following format: [[n]], where n is your score."#;
pub const EN_ENTAIL: &str = r#"Legal language is inherently vague, and the judicial process serves as a clarification of legislative language. Judges can concretize vague terms in legal texts based on the facts of the case and analyze them in the "court view" section of the ruling document to determine whether the vague concept applies. In the legal article "\{\{article\}\}", the vague concept is "\{\{concept\}\}". Please read the following interpretation of the vague concept, and based on the factual description in the ruling document, determine whether the situation in the case applies to the vague concept "\{\{concept\}\}". First, provide reasons for your determination, then strictly follow the format below for your final conclusion: If it meets the definition of the vague concept "\{\{concept\}\}", output "[[Yes]]"; otherwise, output "[[No]]"."#;

/// Expected bodies for the eight benchmark and pipeline templates.
pub fn expected(lang: Language) -> Vec<(TemplateId, String)> {
    let (filter, classify, extract, generate, judge, entail) = match lang {
        Language::Zh => (ZH_FILTER, ZH_CLASSIFY, ZH_EXTRACT, ZH_GENERATE, ZH_JUDGE, ZH_ENTAIL),
        Language::En => (EN_FILTER, EN_CLASSIFY, EN_EXTRACT, EN_GENERATE, EN_JUDGE, EN_ENTAIL),
    };
    let (cv, gen, gold, interp, fact) = match lang {
        Language::Zh => ("[法庭观点]", "[模型生成的理由]", "[法庭观点中理由]", "[模糊概念的解释]", "[事实描述]"),
        Language::En => (
            "[Court View]",
            "[Model-generated Reason]",
            "[Reason in Court View]",
            "[Interpretation of vague Concept]",
            "[Factual Description]",
        ),
    };
    // The zero-shot and step-by-step variants drop the interpretation part.
    let (read_clause, zero_clause, step) = match lang {
        Language::Zh => ("请你阅读下面对模糊概念的解释，根据", "请你根据", "让我们一步一步地思考。"),
        Language::En => (
            "Please read the following interpretation of the vague concept, and based on",
            "Based on",
            "Let's think step by step.",
        ),
    };
    let zero_head = entail.replace(read_clause, zero_clause);
    let zero = paragraphs(&[&zero_head, fact, r"\{\{fact\}\}"]);
    vec![
        (TemplateId::FilterHasReason, paragraphs(&[filter, cv, r"\{\{court view\}\}"])),
        (TemplateId::ClassifyLabel, paragraphs(&[classify, cv, r"\{\{court view\}\}"])),
        (TemplateId::ExtractReason, paragraphs(&[extract, cv, r"\{\{court view\}\}"])),
        (TemplateId::GenerateInterpretation, generate.to_owned()),
        (TemplateId::ConsistencyJudge, paragraphs(&[judge, gen, r"\{\{generated reason\}\}", gold, r"\{\{gold reason\}\}"])),
        (
            TemplateId::EntailmentWithInterpretation,
            paragraphs(&[entail, interp, r"\{\{interpretation\}\}", fact, r"\{\{fact\}\}"]),
        ),
        (TemplateId::EntailmentZeroShot, zero.clone()),
        (TemplateId::EntailmentCot, format!("{zero}\n\n{step}")),
    ]
}

/// Templates whose rendering differs from the published text, as
/// `language/template` names.
pub fn fidelity_mismatches() -> Vec<String> {
    let mut bad = Vec::new();
    for lang in [Language::Zh, Language::En] {
        let set = PromptSet::builtin(lang);
        for (id, body) in expected(lang) {
            match set.get(id).render_with(&BINDINGS, RenderMode::Lenient) {
                Ok(rendered) if rendered == bind(&body) => {}
                _ => bad.push(format!("{}/{}", lang.as_str(), id.as_str())),
            }
        }
    }
    bad
}
