//! Content-addressed cache keys.

use sha2::{Digest, Sha256};

use super::ChatRequest;

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest over everything that determines a chat response: model id,
/// decoding parameters, prompt bytes, and the ordered frame content
/// digests. Any change to any of them changes the key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey(pub String);

impl CacheKey {
    pub fn for_chat(request: &ChatRequest) -> CacheKey {
        let mut hasher = Sha256::new();
        hasher.update(b"chat\0");
        hasher.update(request.model_id.as_bytes());
        hasher.update(b"\0");
        // Bit-exact temperature so formatting can never alias two values.
        hasher.update(request.decoding.temperature.to_bits().to_le_bytes());
        hasher.update(request.decoding.max_tokens.to_le_bytes());
        match request.decoding.seed {
            None => hasher.update(b"noseed\0"),
            Some(s) => {
                hasher.update(b"seed\0");
                hasher.update(s.to_le_bytes());
            }
        }
        hasher.update(b"\0prompt\0");
        hasher.update(Sha256::digest(request.prompt.as_bytes()));
        for frame in &request.frames {
            hasher.update(b"\0frame\0");
            hasher.update(Sha256::digest(&frame.bytes));
        }
        CacheKey(hex::encode(hasher.finalize()))
    }

    /// Key for an embedding call: model id plus the ordered input texts.
    pub fn for_embed(model_id: &str, texts: &[String]) -> CacheKey {
        let mut hasher = Sha256::new();
        hasher.update(b"embed\0");
        hasher.update(model_id.as_bytes());
        for text in texts {
            hasher.update(b"\0text\0");
            hasher.update(Sha256::digest(text.as_bytes()));
        }
        CacheKey(hex::encode(hasher.finalize()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for CacheKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::{Decoding, FramePayload};

    fn request() -> ChatRequest {
        ChatRequest {
            model_id: "model-a".into(),
            frames: vec![
                FramePayload { path: "a.jpg".into(), bytes: vec![1, 2, 3] },
                FramePayload { path: "b.jpg".into(), bytes: vec![4, 5] },
            ],
            prompt: "Is there any fire or smoke?".into(),
            decoding: Decoding::default(),
        }
    }

    #[test]
    fn key_is_stable_for_equal_requests() {
        assert_eq!(CacheKey::for_chat(&request()), CacheKey::for_chat(&request()));
    }

    #[test]
    fn key_changes_with_every_input() {
        let base = CacheKey::for_chat(&request());

        let mut r = request();
        r.model_id = "model-b".into();
        assert_ne!(base, CacheKey::for_chat(&r));

        let mut r = request();
        r.prompt.push('!');
        assert_ne!(base, CacheKey::for_chat(&r));

        let mut r = request();
        r.frames.swap(0, 1);
        assert_ne!(base, CacheKey::for_chat(&r), "frame order matters");

        let mut r = request();
        r.frames[0].bytes[0] ^= 0xff;
        assert_ne!(base, CacheKey::for_chat(&r), "frame bytes matter");

        let mut r = request();
        r.decoding.temperature = 0.5;
        assert_ne!(base, CacheKey::for_chat(&r));

        let mut r = request();
        r.decoding.max_tokens += 1;
        assert_ne!(base, CacheKey::for_chat(&r));

        let mut r = request();
        r.decoding.seed = Some(7);
        assert_ne!(base, CacheKey::for_chat(&r));
    }

    #[test]
    fn frame_path_does_not_affect_key() {
        // Content-addressed: renaming a frame file must hit the same entry.
        let base = CacheKey::for_chat(&request());
        let mut r = request();
        r.frames[0].path = "renamed.jpg".into();
        assert_eq!(base, CacheKey::for_chat(&r));
    }
}
