use crate::fstruct::FeatureStructure;
use crate::pth::PthParams;
use crate::signature::{Signature, TypeId};

pub const TOY: &str = include_str!("../fixtures/sign_num.ale");
pub const TRAINED: &str = include_str!("../fixtures/params_fig8.pth");
pub const RECURSIVE: &str = "bot sub [a,b]. a sub [] intro [f:bot]. b sub [].";
pub const THREE: &str = "bot sub [s,sing]. s sub [] intro [a:sing,b:sing,c:sing]. sing sub [].";

pub const SING: &str = "(sentence (left (np (num sing))) (right (vp (num sing))))";
pub const PLURAL: &str = "(sentence (left (np (num pl))) (right (vp (num pl))))";
pub const TAGGED: &str = "(sentence (left (np (num #1=(sing)))) (right (vp (num #1))))";

pub fn toy_sig() -> Signature {
    Signature::parse(TOY).unwrap()
}

pub fn trained_params(sig: &Signature) -> PthParams {
    PthParams::parse(TRAINED, sig).unwrap()
}

pub fn id(sig: &Signature, name: &str) -> TypeId {
    sig.lookup(name).unwrap()
}

pub fn fs(sig: &Signature, text: &str) -> FeatureStructure {
    FeatureStructure::parse(text, sig).unwrap()
}
