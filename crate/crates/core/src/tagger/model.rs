use super::config::ModelConfig;
use crate::corpus::{TaggedSentence, Vocabulary};
use crate::error::{Error, Result};
use crate::nnet::{
    bilstm_layer, char_encode, Graph, Init, LstmParams, Mode, ParamId, ParamStore, Var,
};
use crate::rng::{Rng, SeedTree};

/// Softmax output layer of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskHead {
    pub task: String,
    pub w: ParamId,
    pub b: ParamId,
    /// 1-based context layer the head reads.
    pub layer: usize,
}

/// Hierarchical multi-task bi-LSTM: word embeddings concatenated with a
/// character bi-LSTM encoding feed a stack of context bi-LSTMs shared by all
/// tasks, each task having its own softmax layer.
#[derive(Debug, Clone)]
pub struct Model {
    pub vocab: Vocabulary,
    pub config: ModelConfig,
    pub store: ParamStore,
    word_emb: ParamId,
    char_emb: ParamId,
    char_fwd: LstmParams,
    char_bwd: LstmParams,
    layers: Vec<(LstmParams, LstmParams)>,
    heads: Vec<TaskHead>,
}

impl Model {
    /// A freshly initialised model for the tasks registered in `vocab`.
    pub fn new(vocab: Vocabulary, config: ModelConfig) -> Result<Self> {
        config.validate()?;
        if vocab.labels(&config.main_task).is_none() {
            return Err(Error::UnknownTask(config.main_task.clone()));
        }
        let seeds = SeedTree::new(config.seed);
        let mut rng = seeds.stream("init");
        let rng = &mut rng;
        let mut store = ParamStore::new();
        let emb_init = Init::Uniform(0.1);
        let word_emb =
            store.add_embedding("emb.word", vocab.n_words(), config.d_word, emb_init, rng);
        let char_emb =
            store.add_embedding("emb.char", vocab.n_chars(), config.d_char, emb_init, rng);
        let char_fwd = LstmParams::new(&mut store, "char.fwd", config.d_char, config.d_char, rng);
        let char_bwd = LstmParams::new(&mut store, "char.bwd", config.d_char, config.d_char, rng);

        let mut layers = Vec::with_capacity(config.n_layers);
        let mut input_dim = config.d_word + 2 * config.d_char;
        for l in 1..=config.n_layers {
            let fwd = LstmParams::new(
                &mut store,
                &format!("ctx{l}.fwd"),
                input_dim,
                config.d_hidden,
                rng,
            );
            let bwd = LstmParams::new(
                &mut store,
                &format!("ctx{l}.bwd"),
                input_dim,
                config.d_hidden,
                rng,
            );
            layers.push((fwd, bwd));
            input_dim = 2 * config.d_hidden;
        }

        let mut heads = Vec::new();
        for task in vocab.task_ids() {
            // Heads draw from their own streams so adding a task leaves the
            // backbone initialisation unchanged.
            let mut head_rng = seeds.stream(&format!("init.out.{task}"));
            let n_labels = vocab.labels(task).map_or(0, |l| l.len());
            let w = store.add_matrix(
                &format!("out.{task}.w"),
                n_labels,
                2 * config.d_hidden,
                Init::Glorot,
                &mut head_rng,
            );
            let b = store.add_matrix(
                &format!("out.{task}.b"),
                n_labels,
                1,
                Init::Zeros,
                &mut head_rng,
            );
            let layer = if task == config.main_task {
                config.n_layers
            } else {
                config.aux_output_layer
            };
            heads.push(TaskHead {
                task: task.to_string(),
                w,
                b,
                layer,
            });
        }

        Ok(Model {
            vocab,
            config,
            store,
            word_emb,
            char_emb,
            char_fwd,
            char_bwd,
            layers,
            heads,
        })
    }

    /// Builds a model for training on `corpora`; the vocabulary is the
    /// union over all of them.
    pub fn for_corpora(config: ModelConfig, corpora: &[(&str, &[TaggedSentence])]) -> Result<Self> {
        let mut vocab = Vocabulary::build(corpora.iter().map(|(_, c)| *c));
        for (task, _) in corpora {
            if vocab.labels(task).is_none() {
                vocab.add_task(task, &[]);
            }
        }
        Model::new(vocab, config)
    }

    pub fn heads(&self) -> &[TaskHead] {
        &self.heads
    }

    pub fn head(&self, task: &str) -> Result<&TaskHead> {
        self.heads
            .iter()
            .find(|h| h.task == task)
            .ok_or_else(|| Error::UnknownTask(task.to_string()))
    }

    /// Per-token logits for `task`, as graph nodes.
    pub fn forward(
        &self,
        g: &mut Graph,
        tokens: &[String],
        task: &str,
        mode: Mode,
        rng: &mut Rng,
    ) -> Result<Vec<Var>> {
        let head = self.head(task)?;
        if tokens.is_empty() {
            return Err(Error::Empty("sentence"));
        }
        let store = &self.store;
        let mut states = Vec::with_capacity(tokens.len());
        for token in tokens {
            let w = g.lookup(store, self.word_emb, self.vocab.word_id(token));
            let chars = self.vocab.char_ids(token);
            let c = char_encode(
                g,
                store,
                &self.char_fwd,
                &self.char_bwd,
                self.char_emb,
                &chars,
            )?;
            let x = g.concat(&[w, c]);
            states.push(g.gaussian_noise(x, self.config.sigma, mode, rng)?);
        }
        for (fwd, bwd) in &self.layers[..head.layer] {
            states = bilstm_layer(g, store, fwd, bwd, &states)?;
        }
        states
            .into_iter()
            .map(|h| g.affine(store, head.w, h, Some(head.b)))
            .collect()
    }

    /// Inference-mode scores (logits) per token.
    pub fn scores(&self, tokens: &[String], task: &str) -> Result<Vec<Vec<f64>>> {
        let mut g = Graph::new();
        // inference draws nothing from the stream
        let mut rng = SeedTree::new(0).stream("unused");
        let logits = self.forward(&mut g, tokens, task, Mode::Infer, &mut rng)?;
        Ok(logits.iter().map(|&v| g.value(v).to_vec()).collect())
    }

    /// Greedy per-token argmax; ties go to the lowest label id.
    pub fn predict(&self, tokens: &[String], task: &str) -> Result<Vec<String>> {
        let labels = self
            .vocab
            .labels(task)
            .ok_or_else(|| Error::UnknownTask(task.to_string()))?;
        Ok(self
            .scores(tokens, task)?
            .iter()
            .map(|s| labels.name(argmax(s)).to_string())
            .collect())
    }

    /// Summed token cross-entropy of a sentence under its own task.
    pub fn sentence_loss(
        &self,
        g: &mut Graph,
        sentence: &TaggedSentence,
        mode: Mode,
        rng: &mut Rng,
    ) -> Result<Var> {
        let labels = self
            .vocab
            .labels(&sentence.task_id)
            .ok_or_else(|| Error::UnknownTask(sentence.task_id.clone()))?;
        if sentence.labels.len() != sentence.tokens.len() {
            return Err(Error::Misaligned(format!(
                "{} tokens, {} labels",
                sentence.tokens.len(),
                sentence.labels.len()
            )));
        }
        let gold: Vec<usize> = sentence
            .labels
            .iter()
            .map(|l| {
                labels.get(l).ok_or_else(|| {
                    Error::Config(format!(
                        "label {l:?} not in the {} inventory",
                        sentence.task_id
                    ))
                })
            })
            .collect::<Result<_>>()?;
        let logits = self.forward(g, &sentence.tokens, &sentence.task_id, mode, rng)?;
        let losses = logits
            .into_iter()
            .zip(gold)
            .map(|(z, y)| g.softmax_xent(z, y))
            .collect::<Result<Vec<_>>>()?;
        Ok(g.sum(&losses))
    }

    /// Forward, backward and an immediate SGD update on one sentence.
    /// Returns the sentence loss before the update.
    pub fn train_step(&mut self, sentence: &TaggedSentence, rng: &mut Rng) -> Result<f64> {
        let mut g = Graph::new();
        let loss = self.sentence_loss(&mut g, sentence, Mode::Train, rng)?;
        g.backward(loss, &mut self.store);
        self.store.sgd_update(self.config.lr);
        Ok(g.scalar(loss))
    }

    /// Replaces every parameter's values from `(name, data)` pairs; all
    /// parameters must be covered exactly once with matching sizes.
    pub(crate) fn load_params(&mut self, params: Vec<(String, Vec<f64>)>) -> Result<()> {
        if params.len() != self.store.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                self.store.len(),
                params.len()
            )));
        }
        for (name, data) in params {
            let id = self
                .store
                .id(&name)
                .ok_or_else(|| Error::Checkpoint(format!("unexpected tensor {name}")))?;
            self.store
                .set_data(id, data)
                .map_err(|e| Error::Checkpoint(e.to_string()))?;
        }
        Ok(())
    }
}

/// Index of the largest score, lowest index on ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
