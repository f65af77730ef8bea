use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::config::Sampling;
use super::model::Model;
use crate::corpus::TaggedSentence;
use crate::error::{Error, Result};
use crate::rng::{Rng, SeedTree};

/// Mean per-sentence loss of one task in one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub task: String,
    pub mean_loss: f64,
    pub instances: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub entries: Vec<EpochLoss>,
}

impl TrainLog {
    /// Tab-separated `epoch task mean_loss` rows with a header line.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "epoch\ttask\tmean_loss")?;
        for e in &self.entries {
            writeln!(out, "{}\t{}\t{}", e.epoch, e.task, e.mean_loss)?;
        }
        Ok(())
    }

    pub fn task_losses(&self, task: &str) -> Vec<f64> {
        self.entries
            .iter()
            .filter(|e| e.task == task)
            .map(|e| e.mean_loss)
            .collect()
    }
}

/// The (task index, instance index) steps of one epoch.
///
/// With [`Sampling::Shuffled`] this is a uniform shuffle of all instances of
/// all tasks; with [`Sampling::TaskUniform`] each of the same number of steps
/// draws a non-empty task uniformly and then one of its instances.
pub fn epoch_schedule(sizes: &[usize], sampling: Sampling, rng: &mut Rng) -> Vec<(usize, usize)> {
    match sampling {
        Sampling::Shuffled => {
            let mut steps: Vec<(usize, usize)> = sizes
                .iter()
                .enumerate()
                .flat_map(|(t, &n)| (0..n).map(move |i| (t, i)))
                .collect();
            steps.shuffle(rng);
            steps
        }
        Sampling::TaskUniform => {
            let tasks: Vec<usize> = (0..sizes.len()).filter(|&t| sizes[t] > 0).collect();
            let total: usize = sizes.iter().sum();
            (0..total)
                .map(|_| {
                    let t = tasks[rng.random_range(0..tasks.len())];
                    (t, rng.random_range(0..sizes[t]))
                })
                .collect()
        }
    }
}

/// Trains with per-sentence SGD for `model.config.epochs` epochs.
///
/// `corpora` pairs task ids with their training sentences; the main task
/// must be among them and non-empty. `after_epoch` runs after every epoch
/// (e.g. for dev-set evaluation) with the 1-based epoch number.
pub fn train_with<F>(
    model: &mut Model,
    corpora: &[(&str, &[TaggedSentence])],
    mut after_epoch: F,
) -> Result<TrainLog>
where
    F: FnMut(usize, &Model) -> Result<()>,
{
    let main = &model.config.main_task;
    match corpora.iter().find(|(t, _)| t == main) {
        Some((_, c)) if !c.is_empty() => {}
        _ => return Err(Error::Empty("main task corpus")),
    }
    for (task, sentences) in corpora {
        model.head(task)?;
        if let Some(s) = sentences.iter().find(|s| s.task_id != *task) {
            return Err(Error::Misaligned(format!(
                "sentence of task {} in the {task} corpus",
                s.task_id
            )));
        }
    }

    let seeds = SeedTree::new(model.config.seed);
    let mut sampler = seeds.stream("sampling");
    let mut noise = seeds.stream("noise");
    let sizes: Vec<usize> = corpora.iter().map(|(_, c)| c.len()).collect();
    let mut log = TrainLog::default();

    for epoch in 1..=model.config.epochs {
        let mut sums = vec![0.0; corpora.len()];
        let mut counts = vec![0usize; corpora.len()];
        for (t, i) in epoch_schedule(&sizes, model.config.sampling, &mut sampler) {
            sums[t] += model.train_step(&corpora[t].1[i], &mut noise)?;
            counts[t] += 1;
        }
        for (t, (task, _)) in corpora.iter().enumerate() {
            if counts[t] > 0 {
                log.entries.push(EpochLoss {
                    epoch,
                    task: task.to_string(),
                    mean_loss: sums[t] / counts[t] as f64,
                    instances: counts[t],
                });
            }
        }
        after_epoch(epoch, model)?;
    }
    Ok(log)
}

pub fn train(model: &mut Model, corpora: &[(&str, &[TaggedSentence])]) -> Result<TrainLog> {
    train_with(model, corpora, |_, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagger::ModelConfig;

    fn s(tokens: &str, labels: &str, task: &str) -> TaggedSentence {
        TaggedSentence {
            tokens: tokens.split(' ').map(String::from).collect(),
            labels: labels.split(' ').map(String::from).collect(),
            task_id: task.into(),
        }
    }

    fn tiny() -> ModelConfig {
        ModelConfig {
            d_word: 4,
            d_char: 3,
            d_hidden: 5,
            n_layers: 2,
            aux_output_layer: 2,
            epochs: 3,
            main_task: "chunk".into(),
            ..ModelConfig::default()
        }
    }

    #[test]
    fn shuffled_schedule_covers_everything_once() {
        let mut rng = SeedTree::new(5).stream("s");
        let mut steps = epoch_schedule(&[3, 0, 2], Sampling::Shuffled, &mut rng);
        steps.sort();
        assert_eq!(steps, [(0, 0), (0, 1), (0, 2), (2, 0), (2, 1)]);
    }

    #[test]
    fn task_uniform_schedule() {
        let mut rng = SeedTree::new(5).stream("s");
        let steps = epoch_schedule(&[1, 0, 99], Sampling::TaskUniform, &mut rng);
        assert_eq!(steps.len(), 100);
        assert!(steps.iter().all(|&(t, i)| t != 1 && i < [1, 0, 99][t]));
        let task0 = steps.iter().filter(|s| s.0 == 0).count();
        assert!((30..=70).contains(&task0), "{task0}");
    }

    #[test]
    fn empty_main_corpus_is_an_error() {
        let aux = vec![s("a b", "B-<m I-<m", "keystroke")];
        let main = vec![s("x", "B-NP", "chunk")];
        let mut m = Model::for_corpora(tiny(), &[("chunk", &main), ("keystroke", &aux)]).unwrap();
        let err = train(&mut m, &[("chunk", &[]), ("keystroke", &aux)]).unwrap_err();
        assert!(matches!(err, Error::Empty(_)));
    }

    #[test]
    fn empty_aux_is_single_task_training() {
        let main = vec![
            s("the dog runs", "B-NP I-NP B-VP", "chunk"),
            s("a cat", "B-NP I-NP", "chunk"),
        ];
        let mut single = Model::for_corpora(tiny(), &[("chunk", &main)]).unwrap();
        let log_single = train(&mut single, &[("chunk", &main)]).unwrap();

        let mut multi =
            Model::for_corpora(tiny(), &[("chunk", &main), ("keystroke", &[])]).unwrap();
        let log_multi = train(&mut multi, &[("chunk", &main), ("keystroke", &[])]).unwrap();
        assert_eq!(log_single, log_multi);
        for (id, p) in single.store.iter() {
            assert_eq!(p.data, multi.store.get(id).data, "{}", p.name);
        }
    }

    #[test]
    fn logs_are_reproducible() {
        let main = vec![s("the dog runs", "B-NP I-NP B-VP", "chunk")];
        let aux = vec![s("a cat sat", "B-<m I-<m B->m1", "keystroke")];
        let corpora: [(&str, &[TaggedSentence]); 2] = [("chunk", &main), ("keystroke", &aux)];
        let run = || {
            let mut m = Model::for_corpora(tiny(), &corpora).unwrap();
            train(&mut m, &corpora).unwrap()
        };
        let a = run();
        assert_eq!(a, run());
        assert_eq!(a.entries.len(), 6);
        let mut out = Vec::new();
        a.write_tsv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("epoch\ttask\tmean_loss\n1\tchunk\t"));
    }
}
