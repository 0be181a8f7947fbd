use ptrparse_core::config::{Dims, Mode};
use ptrparse_core::gradcheck::check_gradients;
use ptrparse_core::scorer::{sentence_loss, ScorerModel, TrainExample, VocabSizes};
use ptrparse_core::vocab::SentenceIds;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_model(seed: u64) -> ScorerModel {
    let dims = Dims {
        word_dim: 4,
        tag_dim: 3,
        enc_hidden: 5,
        dec_hidden: 6,
        label_hidden: 4,
    };
    let sizes = VocabSizes {
        words: 6,
        tags: 4,
        labels: 3,
    };
    let mut m = ScorerModel::new(dims, sizes, 1.0, &mut ChaCha8Rng::seed_from_u64(seed));
    // break the zero initialisation of the linear terms so their paths are exercised
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
    use rand::Rng;
    for t in m.params.tensors_mut() {
        for v in &mut t.data {
            *v += rng.gen_range(-0.1..0.1);
        }
    }
    m
}

fn three_words() -> TrainExample {
    TrainExample {
        ids: SentenceIds {
            words: vec![2, 3, 4],
            tags: vec![2, 3, 2],
        },
        heads: vec![2, 0, 2],
        labels: vec![Some(0), Some(1), Some(2)],
    }
}

fn check(mode: Mode, example: &TrainExample) {
    let model = small_model(21);
    let mut grad = model.params.zeros_like();
    sentence_loss(&model, example, mode, Some(&mut grad)).unwrap();
    let report = check_gradients(&model, &grad, 1e-4, |m| {
        sentence_loss(m, example, mode, None).unwrap().total()
    });
    for t in &report {
        assert!(
            t.max_rel_error <= 1e-4,
            "{:?}: {} max relative error {:e} (abs {:e})",
            mode,
            t.name,
            t.max_rel_error,
            t.max_abs_error
        );
    }
}

#[test]
fn l2r_gradients_match_finite_differences() {
    check(Mode::L2r, &three_words());
}

#[test]
fn topdown_gradients_match_finite_differences() {
    check(Mode::TopDown, &three_words());
}

#[test]
fn gradients_with_root_on_stack_and_unknown_labels() {
    let ex = TrainExample {
        ids: SentenceIds {
            words: vec![1, 5, 5, 2],
            tags: vec![3, 1, 2, 2],
        },
        heads: vec![0, 4, 0, 3],
        labels: vec![Some(2), None, Some(0), Some(1)],
    };
    check(Mode::TopDown, &ex);
    check(Mode::L2r, &ex);
}
